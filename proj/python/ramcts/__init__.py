# Copyright 2026 The ramcts Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.


"""Responsibility attribution for agents in card-game Dec-POMDPs.

Degrees are returned as (numerator, denominator) pairs; ``values`` holds the
same numbers as floats.
"""

from ramcts._ramcts import (
    Context,
    ContractViolation,
    Game,
    GenerationExhausted,
    InconsistentTrajectory,
    InvalidIntervention,
    NotAFailure,
    Trajectory,
    epsilon,
    estimate_under_uncertainty,
    exact_reference,
    generate_losing,
    method_names,
    posterior_context,
    rollout,
    search,
    step_grid,
)

__all__ = [
    "Context",
    "ContractViolation",
    "Game",
    "GenerationExhausted",
    "InconsistentTrajectory",
    "InvalidIntervention",
    "NotAFailure",
    "Trajectory",
    "epsilon",
    "estimate_under_uncertainty",
    "exact_reference",
    "generate_losing",
    "method_names",
    "posterior_context",
    "rollout",
    "search",
    "step_grid",
]
