/*
 Copyright 2026 The rtnmpc Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#pragma once

#include <stdexcept>
#include <string>

namespace rtnmpc {

/// Invalid dimensions, option values or option combinations.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a single integration step cannot be completed.
class IntegrationError : public std::runtime_error {
public:
  IntegrationError(const std::string &what, int stage, double residual)
      : std::runtime_error(what), stage_(stage), residual_(residual) {}

  /// Runge-Kutta stage (explicit schemes) or -1 for the implicit solve.
  int stage() const noexcept { return stage_; }
  /// Last Newton residual norm for implicit schemes, NaN otherwise.
  double residual() const noexcept { return residual_; }

private:
  int stage_;
  double residual_;
};

/// Integration failure while building the QP, tagged with the shooting interval.
class GenerationError : public std::runtime_error {
public:
  GenerationError(const std::string &what, int interval)
      : std::runtime_error(what), interval_(interval) {}

  int interval() const noexcept { return interval_; }

private:
  int interval_;
};

} // namespace rtnmpc
