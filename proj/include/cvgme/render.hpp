#pragma once

// Symbolic rendering of the sum criterion for a labelled tree: one variance
// term per edge plus the root term on the left, and every K^(k) on the right.

#include <string>
#include <vector>

#include "cvgme/criteria.hpp"
#include "cvgme/trees.hpp"

namespace cvgme {

enum class RenderFormat { text, latex };

namespace detail {

inline std::string coeff(RenderFormat f, char q, int j, int i) {
    const std::string idx = std::to_string(j) + (j > 9 || i > 9 ? "," : "") + std::to_string(i);
    if (f == RenderFormat::latex) return std::string("\\ell^{") + q + "}_{" + idx + "}";
    return std::string("l") + q + idx;
}

inline std::string quad(RenderFormat f, char q, int i) {
    if (f == RenderFormat::latex) return std::string(1, q) + "_{" + std::to_string(i) + "}";
    return std::string(1, q) + std::to_string(i);
}

inline std::string variance_term(RenderFormat f, char q, const std::vector<int>& par, int i, int n) {
    const bool tex = f == RenderFormat::latex;
    if (i == n || par[i] == 0) {
        const std::string c = coeff(f, q, i, i);
        return tex ? "(" + c + ")^{2}\\langle(\\Delta " + quad(f, q, i) + ")^{2}\\rangle"
                   : c + "^2 <(d" + quad(f, q, i) + ")^2>";
    }
    const std::string inner = coeff(f, q, i, i) + (tex ? " " : "*") + quad(f, q, i) + " + " +
                              coeff(f, q, par[i], i) + (tex ? " " : "*") + quad(f, q, par[i]);
    return tex ? "\\langle[\\Delta(" + inner + ")]^{2}\\rangle" : "<[d(" + inner + ")]^2>";
}

inline std::string abs_of(const std::string& s) { return "|" + s + "|"; }

inline std::string product(RenderFormat f, int j, int i) {
    return coeff(f, 'x', j, i) + (f == RenderFormat::latex ? "" : "*") + coeff(f, 'p', j, i);
}

} // namespace detail

inline std::string criterion_print(const LabeledTree& lt, RenderFormat f = RenderFormat::text) {
    const auto par = parents(lt);
    const int n = lt.order();
    const bool tex = f == RenderFormat::latex;
    std::string out;
    for (char q : {'x', 'p'}) {
        out += tex ? std::string("U^{") + q + "} &= " : std::string("U") + q + " = ";
        for (int i = 1; i <= n; ++i) {
            if (i > 1) out += " + ";
            out += detail::variance_term(f, q, par, i, n);
        }
        out += tex ? " \\\\\n" : "\n";
    }
    const auto splits = bipartitions(n);
    for (const auto& s : splits) {
        out += tex ? "\\mathcal{K}^{(" + s.to_string() + ")} &= " : "K(" + s.to_string() + ") = ";
        std::vector<std::string> terms;
        for (int i = 1; i < n; ++i) {
            if (s.in_i(i) == s.in_i(par[i])) {
                terms.push_back(detail::abs_of(detail::product(f, i, i) + " + " + detail::product(f, par[i], i)));
            } else {
                terms.push_back(detail::abs_of(detail::product(f, i, i)));
                terms.push_back(detail::abs_of(detail::product(f, par[i], i)));
            }
        }
        terms.push_back(detail::abs_of(detail::product(f, n, n)));
        for (std::size_t t = 0; t < terms.size(); ++t) out += (t ? " + " : "") + terms[t];
        out += tex ? " \\\\\n" : "\n";
    }
    return out;
}

} // namespace cvgme
