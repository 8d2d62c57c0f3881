"""Tour of the information-state filters on a two-sensor weather team.

A hidden two-state weather process (calm / stormy) is watched by two
stations with noisy sensors.  Their readings and control decisions reach
each other with a lag that depends on the sharing rule.  This script
rolls one trajectory and shows, step by step:

* the pooled (team) posterior over the hidden state,
* what each station actually knows under several sharing rules,
* each station's own posterior, checked against the exact conditional
  law obtained by enumerating every history consistent with its view.

Run:  python3 demos/filter_tour.py [--seed N]
"""

import argparse

import numpy as np

from teamdp import (
    ConstantMemberStrategy,
    DecentralizedStrategy,
    InformationStructure,
    TeamModel,
    extract_views,
    member_belief,
    rollout,
    team_belief_from_history,
    view_key,
)
from teamdp import oracle
from teamdp.model import view_known


def build_model() -> TeamModel:
    # two stations, binary actions (log / report), 3 decision epochs
    flip = 0.25
    acc = 0.85
    transition = np.empty((2, 4, 2))
    transition[0, :, :] = [1.0 - flip, flip]
    transition[1, :, :] = [flip, 1.0 - flip]
    kernel = np.array([[acc, 1.0 - acc], [1.0 - acc, acc]])
    stage = np.array(
        [
            [[0.0, 0.4, 0.3, 0.6], [0.8, 0.3, 0.5, 0.1]],
            [[0.1, 0.5, 0.2, 0.7], [0.6, 0.2, 0.4, 0.0]],
            [[0.2, 0.6, 0.1, 0.5], [0.7, 0.1, 0.3, 0.2]],
        ]
    )
    return TeamModel(
        num_members=2,
        horizon=3,
        states=("calm", "stormy"),
        actions=(("log", "report"), ("log", "report")),
        observations=(("clear", "dark"), ("clear", "dark")),
        initial_dist=np.array([0.7, 0.3]),
        transition=transition,
        observation_kernels=(kernel, kernel.copy()),
        stage_cost=stage,
        terminal_cost=np.array([0.0, 1.0]),
    )


class EchoLastReading:
    """Member strategy for the demo: repeat the latest own reading as the
    action (log on 'clear', report on 'dark'); log when nothing seen yet."""

    def __init__(self, member: int):
        self.member = member

    def member_action(self, obs_seq, act_seq, t):
        if not obs_seq:
            return 0
        return obs_seq[-1][self.member]


def show_trajectory(model, traj):
    print("realized trajectory (observations arrive one epoch after the state moves):")
    print(f"  states       : {' -> '.join(model.states[x] for x in traj.states)}")
    for t, u in enumerate(traj.actions):
        labels = ", ".join(model.actions[k][u[k]] for k in range(model.num_members))
        print(f"  t={t}: joint action ({labels})", end="")
        y = traj.observations[t]
        seen = ", ".join(model.observations[k][y[k]] for k in range(model.num_members))
        print(f"; readings at t={t + 1}: ({seen})")
    print()


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=6)
    args = ap.parse_args()

    model = build_model()
    sharing = InformationStructure("delayed_sharing", delays=(1, 1))
    profile = DecentralizedStrategy(
        model, sharing, [EchoLastReading(0), EchoLastReading(1)]
    )
    traj = rollout(model, sharing, profile, seed=args.seed).trajectory
    show_trajectory(model, traj)

    print("pooled posterior over the hidden state, epoch by epoch:")
    for t in range(model.horizon + 1):
        views = extract_views(sharing, traj, t, None)
        belief = team_belief_from_history(model, sharing, views)
        ref = oracle.exact_posterior(model, sharing, None, views)
        err = float(np.max(np.abs(belief.probs - ref)))
        probs = ", ".join(f"P({s})={p:.4f}" for s, p in zip(model.states, belief.probs))
        print(f"  t={t}: {probs}   (vs enumeration: max err {err:.1e})")
    print()

    rules = [
        ("one-step delayed sharing", InformationStructure("delayed_sharing", delays=(1, 1))),
        ("two-step delayed sharing", InformationStructure("delayed_sharing", delays=(2, 2))),
        ("periodic sharing, period 2", InformationStructure("periodic_sharing", period=2)),
        ("readings shared, decisions private",
         InformationStructure("delayed_observation_sharing", delays=(1, 1))),
        ("decisions shared, readings private",
         InformationStructure("delayed_control_sharing", delays=(1, 1))),
    ]
    t = model.horizon
    print(f"what station 0 knows at t={t} under different sharing rules:")
    for label, structure in rules:
        view = extract_views(structure, traj, t, 0)
        slots = view_known(view)
        obs = sum(1 for s in slots if s[2] == "obs")
        acts = sum(1 for s in slots if s[2] == "act")
        print(f"  {label:38s}: {obs} readings + {acts} decisions  [{view_key(view)}]")
    print()

    print(f"station posteriors at t={t} (each vs its own enumeration oracle):")
    for label, structure in rules:
        for k in range(model.num_members):
            co = {
                j: EchoLastReading(j) for j in range(model.num_members) if j != k
            }
            view = extract_views(structure, traj, t, k)
            mine = member_belief(model, structure, co, view)
            prof = DecentralizedStrategy(
                model, structure, [EchoLastReading(0), EchoLastReading(1)]
            )
            ref = oracle.exact_posterior(model, structure, prof, view)
            err = float(np.max(np.abs(mine.probs - ref)))
            probs = ", ".join(f"{p:.4f}" for p in mine.probs)
            print(f"  {label:38s} station {k}: ({probs})  max err {err:.1e}")
    print()
    print("the pooled posterior conditions on everything; each station's own")
    print("posterior drifts away from it exactly as its sharing rule delays data.")
    print("note how several rules coincide here: the echo strategy makes every")
    print("decision reveal the reading behind it, so receiving a neighbor's")
    print("decisions is as good as receiving its readings.  conditioning on the")
    print("strategy is doing real work in the member filter.")


if __name__ == "__main__":
    main()
