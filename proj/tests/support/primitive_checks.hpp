// Copyright 2026 The ctraj Authors
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

#ifndef CTRAJ_TESTS__PRIMITIVE_CHECKS_HPP_
#define CTRAJ_TESTS__PRIMITIVE_CHECKS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "ctraj/encoders.hpp"
#include "ctraj/model.hpp"

namespace ctraj::testing
{

struct PrimitiveCheck
{
  std::string name;
  double max_rel_error{0.0};
};

// Finite-difference check of every differentiable primitive on random inputs.
std::vector<PrimitiveCheck> run_primitive_grad_checks(std::uint64_t seed);

// d=8, N=3, T=6, M=2.
ModelConfig tiny_model_config(EncoderVariant variant, std::size_t agents = 3, std::size_t mixtures = 2,
                              std::size_t d = 8);

// Max relative error of the teacher-forced loss gradient on the tiny config.
double full_loss_grad_check(EncoderVariant variant, std::uint64_t seed, std::size_t coords_per_tensor = 0);

}  // namespace ctraj::testing

#endif  // CTRAJ_TESTS__PRIMITIVE_CHECKS_HPP_
