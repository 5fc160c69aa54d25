// Copyright 2026 The ramcts Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RAMCTS_ERRORS_HPP_
#define RAMCTS_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace ramcts {

// Caller broke a documented precondition (shape mismatch, bad index, ...).
class ContractViolation : public std::logic_error {
 public:
  explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

// An intervened action is not valid where it is applied.
class InvalidIntervention : public std::runtime_error {
 public:
  InvalidIntervention(int agent, int t, int action)
      : std::runtime_error("invalid intervention: agent " +
                           std::to_string(agent) + " at t=" +
                           std::to_string(t) + " cannot take action " +
                           std::to_string(action)),
        agent_(agent),
        t_(t),
        action_(action) {}

  int agent() const { return agent_; }
  int t() const { return t_; }
  int action() const { return action_; }

 private:
  int agent_;
  int t_;
  int action_;
};

// An observed trajectory has zero probability under the model.
class InconsistentTrajectory : public std::runtime_error {
 public:
  explicit InconsistentTrajectory(const std::string& what)
      : std::runtime_error("inconsistent trajectory: " + what) {}
};

// Responsibility was requested for a trajectory whose outcome event is false.
class NotAFailure : public std::runtime_error {
 public:
  NotAFailure()
      : std::runtime_error("outcome event does not hold on the factual trajectory") {}
};

class GenerationExhausted : public std::runtime_error {
 public:
  explicit GenerationExhausted(const std::string& what)
      : std::runtime_error("generation exhausted: " + what) {}
};

// Thrown by StepCounter when the environment-step budget is used up.
class BudgetExhausted : public std::runtime_error {
 public:
  BudgetExhausted() : std::runtime_error("environment step budget exhausted") {}
};

}  // namespace ramcts

#endif  // RAMCTS_ERRORS_HPP_
