// Frozen reference features for the fine-tuned point (t = delta_pair,
// u = delta_nh = eta = 0) on an eight-site chain, computed with the dense
// operator reference in oracle.hpp. Guards against silent regressions in
// the correlator pipeline.
#pragma once

#include <array>

namespace golden {

inline constexpr std::array<double, 64> kSweetSpotFeatures = {
    0.24999999999999994,     0.062499999999999972,     2.4375050858650954e-34,
    2.7083389842945504e-35,  0.062499999999999972,     0.24999999999999994,
    0.062499999999999986,    1.9259299443872359e-34,   2.4375050858650954e-34,
    0.062499999999999986,    0.24999999999999994,      0.062499999999999972,
    2.7083389842945504e-35,  1.9259299443872359e-34,   0.062499999999999972,
    0.24999999999999994,
    0,                       0.062499999999999972,     1.2037062274161775e-35,
    2.7083389964687055e-35,  0.062499999999999972,     0,
    0.0625,                  1.4745401148888931e-34,   1.2037062274161775e-35,
    0.0625,                  0,                        0.062499999999999986,
    2.7083389964687055e-35,  1.4745401148888931e-34,   0.062499999999999986,
    0,
    0,                       0.062499999999999958,     0.062499999999999972,
    0.062499999999999972,    0.062499999999999958,     0,
    0.062499999999999986,    0.062499999999999986,     0.062499999999999972,
    0.062499999999999986,    0,                        0.062499999999999972,
    0.062499999999999972,    0.062499999999999986,     0.062499999999999972,
    0,
    0.24999999999999994,     0.0625,                   0.062499999999999986,
    0.0625,                  0.0625,                   0.24999999999999994,
    0.0625,                  0.0625,                   0.062499999999999986,
    0.0625,                  0.24999999999999994,      0.0625,
    0.0625,                  0.0625,                   0.0625,
    0.24999999999999994,
};

inline constexpr double kSweetSpotEntropy = 0.33041384827954423;

}  // namespace golden
