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


from fractions import Fraction

import pytest

import ramcts


def test_metric_examples():
    assert ramcts.epsilon([0.25, 0.75], [0.33, 1.0]) == 0.25
    assert ramcts.epsilon([0.25, 0.75], [0.33, 0.5], mode="lower-bound") == 0.08


def test_step_grid():
    assert ramcts.step_grid(2000)[:3] == [1000, 1300, 1690]


def test_factual_replay_and_posterior():
    game = ramcts.Game("goofspiel", 5)
    observed = ramcts.rollout(game, ramcts.Context(3))
    context = ramcts.posterior_context(game, observed, seed=1)
    assert context.is_posterior
    assert ramcts.rollout(game, context) == observed
    assert ramcts.Trajectory.from_jsonl(observed.to_jsonl()) == observed


def test_factual_intervention_is_noop():
    game = ramcts.Game("euchre", 4)
    context = ramcts.Context(5)
    factual = ramcts.rollout(game, context)
    first = factual.actions[0]
    assert ramcts.rollout(game, context, [(0, 0, first[0])]) == factual


def test_searchers_agree_with_reference():
    game = ramcts.Game("euchre", 5)
    [(_, context, factual)] = ramcts.generate_losing(game, 1, seed=7)
    assert factual.agents_lose
    reference = ramcts.exact_reference(game, context, factual)
    exhaustive = ramcts.search(game, context, factual, method="BF-DT", budget=10**9)["steps"]
    for method in ramcts.method_names():
        budget = 100 * exhaustive if method == "RANDOM" else exhaustive
        result = ramcts.search(game, context, factual, method=method, budget=budget, seed=1)
        assert result["degrees"] == reference, method
        assert result["complete"] or method == "RANDOM"


def test_uncertainty_mean_is_exact_average():
    game = ramcts.Game("goofspiel", 5)
    [(_, _, observed)] = ramcts.generate_losing(game, 1, seed=2)
    out = ramcts.estimate_under_uncertainty(game, observed, samples=4, budget=50000, seed=3)
    per = [[Fraction(n, d) for n, d in s["degrees"]] for s in out["samples"]]
    expected = [sum(col) / len(per) for col in zip(*per)]
    assert [Fraction(n, d) for n, d in out["mean_exact"]] == expected


def test_errors():
    with pytest.raises(ramcts.ContractViolation):
        ramcts.Game("chess", 5)
    with pytest.raises(ValueError):
        ramcts.search(ramcts.Game(), ramcts.Context(0), ramcts.rollout(ramcts.Game(), ramcts.Context(0)),
                      method="nope")
