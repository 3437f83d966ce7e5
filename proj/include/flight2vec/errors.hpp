/*
 * Copyright 2026 The flight2vec Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace f2v {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input table is missing a mandatory column or has a malformed header.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// A stated precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A feature has zero variance and cannot be z-scored.
class DegenerateFeatureError : public Error {
 public:
  using Error::Error;
};

/// Route waypoints are too close together to simulate.
class DegenerateRouteError : public Error {
 public:
  using Error::Error;
};

/// Requested anomaly cannot be applied to this trajectory.
class InapplicableAnomalyError : public Error {
 public:
  using Error::Error;
};

/// Denoising would leave too few points to continue.
class OverFilteredError : public Error {
 public:
  using Error::Error;
};

/// Trajectory is shorter than one patch.
class TrajectoryTooShortError : public Error {
 public:
  using Error::Error;
};

/// Patch budget N*S cannot be satisfied by the trajectory length.
class InfeasibleConfigError : public Error {
 public:
  using Error::Error;
};

/// Array dimensions do not match what an operation requires.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values reached a numeric kernel.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Checkpoint cannot be read or has an incompatible format version.
class CheckpointError : public Error {
 public:
  using Error::Error;
};

/// Experiment or model configuration is inconsistent.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Metric is undefined for the given inputs (e.g. single-class labels).
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

/// The all-zero direction triplet has no class.
class StationaryDirectionError : public Error {
 public:
  using Error::Error;
};

}  // namespace f2v
