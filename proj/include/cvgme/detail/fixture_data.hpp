#pragma once

// Printed matrices embedded verbatim, full rows, every printed digit.
// Symmetrisation and the documented overrides happen in the accessors.

#include <vector>

namespace cvgme::detail {

using Rows = std::vector<std::vector<double>>;

struct CmRecord {
    const char* key;
    Rows x;
    Rows p;
};

// Witness blocks as printed: the stored rows times 1/divisor give Z^a.
struct WitnessRecord {
    const char* key;
    double divisor;
    Rows x;
    Rows p;
};

inline const std::vector<CmRecord>& cm_records() {
    static const std::vector<CmRecord> records{
    {"gamma1", {{6.3, -6.6, 2.8}, {-6.6, 10.0, -5.6}, {2.8, -5.6, 5.4}},
      {{5.4, 5.3, 4.0}, {5.3, 5.5, 4.2}, {4.0, 4.2, 3.5}}},
    {"gamma2", {{5.0, -5.0, -2.0}, {-5.0, 7.0, 3.0}, {-2.0, 3.0, 2.0}},
      {{3.0, 4.0, -3.0}, {4.0, 6.0, -5.0}, {-3.0, -5.0, 6.0}}},
    {"gamma3", {{1.40, 1.15, 0.30}, {1.15, 7.64, 2.48}, {0.30, 2.48, 1.49}},
      {{0.84, -0.15, 0.09}, {-0.15, 0.33, -0.50}, {0.09, -0.50, 1.49}}},
    {"gamma3_full", {{1.38922, 1.14998, 0.299419}, {1.14998, 7.63236, 2.48042}, {0.299419, 2.48042, 1.4841}},
      {{0.827955, -0.15424, 0.0907433}, {-0.15424, 0.315532, -0.49624}, {0.0907433, -0.49624, 1.48488}}},
    {"gamma4a", {{1.89322, 1.79444, 0.87087, 0.350295}, {1.79444, 2.61924, 1.70931, 0.530383}, {0.87087, 1.70931, 1.96209, 0.828527}, {0.350295, 0.530383, 0.828527, 1.23606}},
      {{1.89322, -1.79444, 0.87087, -0.350295}, {-1.79444, 2.61924, -1.70931, 0.530383}, {0.87087, -1.70931, 1.96209, -0.828527}, {-0.350295, 0.530383, -0.828527, 1.23606}}},
    {"gamma4b", {{5.76616, 1.52878, 0.765563, 1.53348}, {1.52878, 8.05052, 1.5276, 3.0599}, {0.765563, 1.5276, 3.26498, 1.5323}, {1.53348, 3.0599, 1.5323, 2.06932}},
      {{0.230645, 0.061151, 0.0612449, -0.306695}, {0.061151, 0.322021, 0.122208, -0.611981}, {0.0612449, 0.122208, 0.522397, -0.612921}, {-0.306695, -0.611981, -0.612921, 2.06932}}},
    {"gamma5b", {{1.02221, 0.0444158, 0.0222153, 0.0444158, 0.222178}, {0.0444158, 1.0888, 0.0444158, 0.0888027, 0.444208}, {0.0222153, 0.0444158, 1.02221, 0.0444158, 0.222178}, {0.0444158, 0.0888027, 0.0444158, 1.0888, 0.444208}, {0.222178, 0.444208, 0.222178, 0.444208, 1.22203}},
      {{1.02221, 0.0444158, 0.0222153, 0.0444158, -0.222178}, {0.0444158, 1.0888, 0.0444158, 0.0888027, -0.444208}, {0.0222153, 0.0444158, 1.02221, 0.0444158, -0.222178}, {0.0444158, 0.0888027, 0.0444158, 1.0888, -0.444208}, {-0.222178, -0.444208, -0.222178, -0.444208, 1.22203}}},
    {"gamma5c", {{1.01364, 0.16921, 0.00397589, 0.00844686, 0.035641}, {0.16921, 1.10058, 0.0438767, 0.0877648, 0.438485}, {0.00397589, 0.0438767, 1.02196, 0.0439097, 0.219645}, {0.00844686, 0.0877648, 0.0439097, 1.08779, 0.439145}, {0.035641, 0.438485, 0.219645, 0.439145, 1.19671}},
      {{1.01364, -0.16921, -0.00397589, -0.00844686, 0.035641}, {-0.16921, 1.10058, 0.0438767, 0.0877648, -0.438485}, {-0.00397589, 0.0438767, 1.02196, 0.0439097, -0.219645}, {-0.00844686, 0.0877648, 0.0439097, 1.08779, -0.439145}, {0.035641, -0.438485, -0.219645, -0.439145, 1.19671}}},
    {"gamma6c", {{1.00601, 0.00996299, 0.110751, 0.0220412, 0.0996522, 0.102581}, {0.00996299, 1.1082, 0.0996528, 0.198639, 1.0828, 0.99682}, {0.110751, 0.0996528, 1.11751, 0.224225, 0.996235, 1.12667}, {0.0220412, 0.198639, 0.224225, 1.44671, 1.98457, 2.2454}, {0.0996522, 1.0828, 0.996235, 1.98457, 9.83666, 9.97538}, {0.102581, 0.99682, 1.12667, 2.2454, 9.97538, 10.2866}},
      {{1.00601, 0.00996299, -0.110751, -0.0220412, -0.0996522, 0.102581}, {0.00996299, 1.1082, -0.0996528, -0.198639, -1.0828, 0.99682}, {-0.110751, -0.0996528, 1.11751, 0.224225, 0.996235, -1.12667}, {-0.0220412, -0.198639, 0.224225, 1.44671, 1.98457, -2.2454}, {-0.0996522, -1.0828, 0.996235, 1.98457, 9.83666, -9.97538}, {0.102581, 0.99682, -1.12667, -2.2454, -9.97538, 10.2866}}},
    {"gamma6d", {{1.01727, 0.0150336, 0.0200197, 0.206136, 0.200098, 0.21641}, {0.0150336, 0.513163, 0.0200209, 0.178237, 0.200154, 0.211026}, {0.0200197, 0.0200209, 1.10944, 0.200099, 1.09521, 1.00374}, {0.206136, 0.178237, 0.200099, 1.47744, 1.99935, 2.24369}, {0.200098, 0.200154, 1.09521, 1.99935, 9.96135, 10.0452}, {0.21641, 0.211026, 1.00374, 2.24369, 10.0452, 10.2858}},
      {{1.01727, 0.0300672, 0.0200197, -0.206136, -0.200098, 0.21641}, {0.0300672, 2.05265, 0.0400418, -0.356474, -0.400308, 0.422052}, {0.0200197, 0.0400418, 1.10944, -0.200099, -1.09521, 1.00374}, {-0.206136, -0.356474, -0.200099, 1.47744, 1.99935, -2.24369}, {-0.200098, -0.400308, -1.09521, 1.99935, 9.96135, -10.0452}, {0.21641, 0.422052, 1.00374, -2.24369, -10.0452, 10.2858}}},
    {"gamma6e", {{2.07887, 0.0788541, 0.729928, 0.729928, 0.788929, 0.749595}, {0.0788541, 1.07884, 0.730827, 0.730827, 0.788736, 0.749621}, {0.729928, 0.730827, 19.0655, 9.06554, 7.28942, 9.32218}, {0.729928, 0.730827, 9.06554, 19.0655, 7.28942, 9.32218}, {0.788929, 0.788736, 7.28942, 7.28942, 6.89127, 7.49556}, {0.749595, 0.749621, 9.32218, 9.32218, 7.49556, 8.5861}},
      {{0.519719, 0.0394271, -0.0364964, -0.0364964, -0.394465, 0.374798}, {0.0394271, 1.07884, -0.0730827, -0.0730827, -0.788736, 0.749621}, {-0.0364964, -0.0730827, 0.190655, 0.0906554, 0.728942, -0.932218}, {-0.0364964, -0.0730827, 0.0906554, 0.190655, 0.728942, -0.932218}, {-0.394465, -0.788736, 0.728942, 0.728942, 6.89127, -7.49556}, {0.374798, 0.749621, -0.932218, -0.932218, -7.49556, 8.5861}}},
    {"gamma6f", {{1.00888, 0.0070959, 0.0070959, 0.44554, 0.000907054, 0.045205}, {0.0070959, 1.00531, 0.00530564, 0.265838, 0.00090708, 0.0452774}, {0.0070959, 0.00530564, 1.00531, 0.265838, 0.00090708, 0.0452774}, {0.44554, 0.265838, 0.265838, 12.3541, 0.0453557, 2.26827}, {0.000907054, 0.00090708, 0.00090708, 0.0453557, 0.020908, 0.0454074}, {0.045205, 0.0452774, 0.0452774, 2.26827, 0.0454074, 1.27089}},
      {{1.00889, 0.00267199, 0.00267199, -0.0446333, -0.0453539, 0.0452056}, {0.00267199, 1.00044, 0.000437932, -0.0224336, -0.00453415, 0.00444848}, {0.00267199, 0.000437932, 1.00044, -0.0224336, -0.00453415, 0.00444848}, {-0.0446333, -0.0224336, -0.0224336, 0.124334, 0.226785, -0.226828}, {-0.0453539, -0.00453415, -0.00453415, 0.226785, 52.2702, -2.27039}, {0.0452056, 0.00444848, 0.00444848, -0.226828, -2.27039, 1.27089}}},
    {"gamma7", {{3.96432, 3.33486, 1.66686}, {3.33486, 3.60552, 1.84641}, {1.66686, 1.84641, 1.27596}},
      {{3.48332, -2.61754, 3.45572}, {-2.61754, 3.13354, -3.379668}, {3.45572, -3.79668, 7.73756}}},
    };
    return records;
}

inline const std::vector<WitnessRecord>& witness_records() {
    static const std::vector<WitnessRecord> records{
    {"3", 168, {{64.0, -8.0, 0.0}, {-8.0, 2.0, -1.0}, {0.0, -1.0, 1.0001}},
      {{100.0, 20.0, 0.0}, {20.0, 29.0, 5.0}, {0.0, 5.0, 1.0001}}},
    {"4a", 5.5002, {{1.0, -0.5, 0.0, 0.0}, {-0.5, 0.5, -0.5, 0.0}, {0.0, -0.5, 1.25, -0.5}, {0.0, 0.0, -0.5, 1.0001}},
      {{1.0, 0.5, 0.0, 0.0}, {0.5, 0.5, 0.5, 0.0}, {0.0, 0.5, 1.25, 0.5}, {0.0, 0.0, 0.5, 1.0001}}},
    {"4b", 68.02, {{4.0, 0.0, 0.0, -2.0}, {0.0, 1.0, 0.0, -1.0}, {0.0, 0.0, 4.0, -2.0}, {-2.0, -1.0, -2.0, 3.01}},
      {{100.0, 0.0, 0.0, 10.0}, {0.0, 25.0, 0.0, 5.0}, {0.0, 0.0, 25.0, 5.0}, {10.0, 5.0, 5.0, 3.01}}},
    {"5b", 2.4801, {{1.0, 0.0, 0.0, 0.0, -0.1}, {0.0, 0.25, 0.0, 0.0, -0.05}, {0.0, 0.0, 1.0, 0.0, -0.1}, {0.0, 0.0, 0.0, 0.25, -0.05}, {-0.1, -0.05, -0.1, -0.05, 0.0401}},
      {{1.0, 0.0, 0.0, 0.0, 0.1}, {0.0, 0.25, 0.0, 0.0, 0.05}, {0.0, 0.0, 1.0, 0.0, 0.1}, {0.0, 0.0, 0.0, 0.25, 0.05}, {0.1, 0.05, 0.1, 0.05, 0.0401}}},
    {"5c", 2.4801, {{1.0, -0.1, 0.0, 0.0, 0.0}, {-0.1, 0.26, 0.0, 0.0, -0.05}, {0.0, 0.0, 1.0, 0.0, -0.1}, {0.0, 0.0, 0.0, 0.25, -0.05}, {0.0, -0.05, -0.1, -0.05, 0.0301}},
      {{1.0, 0.1, 0.0, 0.0, 0.0}, {0.1, 0.26, 0.0, 0.0, 0.05}, {0.0, 0.0, 1.0, 0.0, 0.1}, {0.0, 0.0, 0.0, 0.25, 0.05}, {0.0, 0.05, 0.1, 0.05, 0.0301}}},
    {"6c", 3.2301, {{1.0, 0.0, -0.1, 0.0, 0.0, 0.0}, {0.0, 1.0, 0.0, 0.0, -0.1, 0.0}, {-0.1, 0.0, 1.01, 0.0, 0.0, -0.1}, {0.0, 0.0, 0.0, 0.25, 0.0, -0.05}, {0.0, -0.1, 0.0, 0.0, 0.02, -0.01}, {0.0, 0.0, -0.1, -0.05, -0.01, 0.0301}},
      {{1.0, 0.0, 0.1, 0.0, 0.0, 0.0}, {0.0, 1.0, 0.0, 0.0, 0.1, 0.0}, {0.1, 0.0, 1.01, 0.0, 0.0, 0.1}, {0.0, 0.0, 0.0, 0.25, 0.0, 0.05}, {0.0, 0.1, 0.0, 0.0, 0.02, 0.01}, {0.0, 0.0, 0.1, 0.05, 0.01, 0.0301}}},
    {"6d", 2.7301, {{1.0, 0.0, 0.0, -0.1, 0.0, 0.0}, {0.0, 1.0, 0.0, -0.1, 0.0, 0.0}, {0.0, 0.0, 1.0, 0.0, -0.1, 0.0}, {-0.1, -0.1, 0.0, 0.27, 0.0, -0.05}, {0.0, 0.0, -0.1, 0.0, 0.02, -0.01}, {0.0, 0.0, 0.0, -0.05, -0.01, 0.0201}},
      {{1.0, 0.0, 0.0, 0.1, 0.0, 0.0}, {0.0, 0.25, 0.0, 0.05, 0.0, 0.0}, {0.0, 0.0, 1.0, 0.0, 0.1, 0.0}, {0.1, 0.05, 0.0, 0.27, 0.0, 0.05}, {0.0, 0.0, 0.1, 0.0, 0.02, 0.01}, {0.0, 0.0, 0.0, 0.05, 0.01, 0.0201}}},
    {"6e", 3.1801, {{1.0, 0.0, 0.0, 0.0, -0.1, 0.0}, {0.0, 1.0, 0.0, 0.0, -0.1, 0.0}, {0.0, 0.0, 0.01, 0.0, 0.0, -0.01}, {0.0, 0.0, 0.0, 0.01, 0.0, -0.01}, {-0.1, -0.1, 0.0, 0.0, 0.03, -0.01}, {0.0, 0.0, -0.01, -0.01, -0.01, 0.0301}},
      {{4.0, 0.0, 0.0, 0.0, 0.2, 0.0}, {0.0, 1.0, 0.0, 0.0, 0.1, 0.0}, {0.0, 0.0, 1.0, 0.0, 0.0, 0.1}, {0.0, 0.0, 0.0, 1.0, 0.0, 0.1}, {0.2, 0.1, 0.0, 0.0, 0.03, 0.01}, {0.0, 0.0, 0.1, 0.1, 0.01, 0.0301}}},
    {"6f", 75.4801, {{25.0, 0.0, 0.0, -0.5, 0.0, 0.0}, {0.0, 25.0, 0.0, -0.5, 0.0, 0.0}, {0.0, 0.0, 25.0, -0.5, 0.0, 0.0}, {-0.5, -0.5, -0.5, 0.04, 0., -0.01}, {0.0, 0.0, 0.0, 0.0, 25.0, -0.5}, {0.0, 0.0, 0.0, -0.01, -0.5, 0.0201}},
      {{25.0, 0.0, 0.0, 5.0, 0.0, 0.0}, {0.0, 25.0, 0.0, 0.5, 0.0, 0.0}, {0.0, 0.0, 25.0, 0.5, 0.0, 0.0}, {5.0, 0.5, 0.5, 2.02, 0.0, 0.1}, {0.0, 0.0, 0.0, 0.0, 0.01, 0.01}, {0.0, 0.0, 0.0, 0.1, 0.01, 0.0201}}},
    };
    return records;
}

} // namespace cvgme::detail
