#include "eccm/presets.hpp"

namespace eccm::presets {

JammingGrid reference_grid() { return JammingGrid({1.0, 2.0, 3.0, 4.0}); }

Eigen::MatrixXd reference_channel_raw() {
  Eigen::MatrixXd p(4, 4);
  p << 0.3878, 0.3215, 0.1858, 0.1049,
       0.2980, 0.3617, 0.2146, 0.1256,
       0.2040, 0.2583, 0.3307, 0.2070,
       0.1029, 0.1408, 0.2140, 0.5422;
  return p;
}

JammingChannel reference_channel() {
  return JammingChannel::normalized(reference_grid(), reference_channel_raw(),
                                    kPublishedRowDefect);
}

Eigen::MatrixXd reference_channel_error() {
  Eigen::MatrixXd d(4, 4);
  d << -0.1099, 0.0361, 0.0429, 0.0310,
       -0.0079, 0.0588, -0.0165, -0.0344,
       0.0192, 0.0428, -0.1213, 0.0593,
       0.0973, 0.0521, -0.0882, -0.0612;
  return d;
}

JammingChannel reference_jammer_belief() {
  return JammingChannel::normalized(reference_grid(),
                                    reference_channel_raw() + reference_channel_error(),
                                    kPublishedRowDefect);
}

UtilityParams reference_params() { return UtilityParams(100.0, 1e4); }

KinematicsModel barrage_model() { return KinematicsModel::constant_velocity(1.0, 3); }

DeceptionModel deception_model() {
  const KinematicsModel base = barrage_model();
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(6, 6);
  return DeceptionModel(base.a(), eye, eye, eye, 0.5 * eye, eye, base.sampling_period());
}

SimulationConfig barrage_config() {
  return SimulationConfig(barrage_model(), reference_channel(), reference_params());
}

SimulationConfig deception_config() {
  return SimulationConfig(deception_model(), reference_channel(), reference_params());
}

SimulationConfig mismatch_config() {
  SimulationConfig config = barrage_config();
  config.mismatch = MismatchSpec{reference_jammer_belief(), 1};
  return config;
}

}  // namespace eccm::presets
