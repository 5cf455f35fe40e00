#pragma once

// Reference scenario: a constant-velocity target in three axes observed
// through a four-level jamming channel, under barrage or deception jamming.

#include "eccm/model.hpp"
#include "eccm/riccati.hpp"
#include "eccm/sim.hpp"

namespace eccm::presets {

/// Jamming powers {1, 2, 3, 4}.
JammingGrid reference_grid();

/// Four-level channel as published to four decimals, rows renormalized.
JammingChannel reference_channel();

/// The four-decimal matrix before renormalization.
Eigen::MatrixXd reference_channel_raw();

/// Error in the jammer's estimate of the channel (added to the raw matrix).
Eigen::MatrixXd reference_channel_error();

/// The jammer's estimate: raw channel plus error, rows renormalized.
JammingChannel reference_jammer_belief();

/// c1 = 100, c2 = 1e4.
UtilityParams reference_params();

/// Barrage jamming on the constant-velocity model, T = 1, Q0 = C = I.
KinematicsModel barrage_model();

/// Deception jamming with B1 = B2 = Q0 = C1 = I and C2 = 0.5 I.
DeceptionModel deception_model();

SimulationConfig barrage_config();
SimulationConfig deception_config();
/// Barrage config with the jammer's estimate attached (scenario 1).
SimulationConfig mismatch_config();

/// Largest row-sum defect accepted when renormalizing published matrices.
inline constexpr double kPublishedRowDefect = 5e-4;

}  // namespace eccm::presets
