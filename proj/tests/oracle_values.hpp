#pragma once
// Generated by tests/oracles/generate.py (numpy/scipy); do not edit.
namespace oracle {
inline constexpr double kGapDelta0_0p5 = 0;
inline constexpr double kDerivDelta0_0p5 = 0.85091812823932189;
inline constexpr double kGapDelta0_1p0 = 5.5511151231257827e-17;
inline constexpr double kDerivDelta0_1p0 = 0.55144112954356705;
inline constexpr double kGapDelta0_2p0 = 2.2204460492503131e-16;
inline constexpr double kDerivDelta0_2p0 = 0.14657428130346251;
inline constexpr double kGapDelta0_3p0 = -1.7763568394002505e-15;
inline constexpr double kDerivDelta0_3p0 = 0.029745208880876284;
inline constexpr double kRobust_0p5 = 0.450484535985471;
inline constexpr double kRobust_1p0 = 0.39132435102619;
inline constexpr double kRobust_1p5 = 0.35032292708264;
inline constexpr double kRobust_2p0 = 0.322396637567842;
inline constexpr double kRobust_3p0 = 0.287626186285338;
inline constexpr double kHx_1p0 = 2.0185711385668568;
inline constexpr double kHy_1p0 = 0.27318389677119731;
inline constexpr double kHx_2p0 = 2.8289016599391945;
inline constexpr double kHy_2p0 = 0.051813141255186934;
inline constexpr double kGaussQuarter = 0.54488327013467475;
inline constexpr double kGaussIntegral = 0.52384519848501387;
inline constexpr double kXGate_a2_2_T30_D0 = 1.025243643e-07;
inline constexpr double kXGate_a2_2_T30_D5em3 = 9.879605677e-05;
inline constexpr double kKerrGate_1p5_D5em3 = 0.0003663426986;
inline constexpr double kKerrGate_2p0_D5em3 = 0.0004923547504;
inline constexpr double kKerrGate_3p0_D5em3 = 0.0007398857858;
inline constexpr double kDragExact_a2_2_T20_t5_re = -0.01974734575;
inline constexpr double kDragExact_a2_2_T20_t5_im = -1.485766048e-11;
}  // namespace oracle
