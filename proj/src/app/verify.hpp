// Copyright 2026 The partscreen Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#ifndef PARTSCREEN_APP_VERIFY_HPP_
#define PARTSCREEN_APP_VERIFY_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

// Built-in property suites: gradient checks, transform roundtrips, the
// pseudo-label truth table, masking invariants, loss closed forms and metric
// cross-checks. Every check reports the measured quantity next to its bound.
namespace partscreen::app {

struct Check {
  std::string suite;
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct VerifyOptions {
  std::uint64_t seed = 0;
  // Mutation sanity fixture: negates partial_bce wherever the suites call it.
  bool flip_partial_bce_sign = false;
};

std::vector<Check> fft_suite(const VerifyOptions& options);
std::vector<Check> gradient_suite(const VerifyOptions& options);
std::vector<Check> augmentation_suite(const VerifyOptions& options);
std::vector<Check> pseudo_label_suite(const VerifyOptions& options);
std::vector<Check> masking_suite(const VerifyOptions& options);
std::vector<Check> loss_suite(const VerifyOptions& options);
std::vector<Check> metric_suite(const VerifyOptions& options);

std::vector<Check> run_verify(const VerifyOptions& options = {});
bool all_passed(const std::vector<Check>& checks);
nlohmann::json to_json(const std::vector<Check>& checks);

}  // namespace partscreen::app

#endif  // PARTSCREEN_APP_VERIFY_HPP_
