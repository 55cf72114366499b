"""Train the classifier on the circle task and compare it with the linear baseline.

Re-uploading the features as RZ phases plus the MCRY post-selection is what
lets the decision boundary bend. The baseline drops both.

    python demos/02_circle_classifier.py [epochs]
"""

import sys

import numpy as np

from adeqnn.tasks import classification as cls

epochs = int(sys.argv[1]) if len(sys.argv) > 1 else 30

for variant in ("ade", "baseline"):
    config = cls.task_config("circle", variant)
    hyper = cls.ClassifyHyper(epochs=epochs)
    res = cls.run_classification("circle", config, hyper, seed=0)
    costs = res.record.costs
    print(f"{variant:9s} cost {costs[0]:.3f} -> {costs[-1]:.3f}  "
          f"train {res.train_accuracy:.3f}  test {res.test_accuracy:.3f}")

    # coarse text picture of the learned boundary; '#' marks class 1 (inside)
    grid = cls.decision_grid(config, res.record.final_params, n=21)
    pred = grid[:, -1].reshape(21, 21).T[::-1]
    print("\n".join("".join("#" if v else "." for v in row) for row in pred))
    print()

# the true boundary for comparison
axis = np.linspace(-1, 1, 21)
inside = (axis[None, :] ** 2 + axis[::-1, None] ** 2) < 2 / np.pi
print("target")
print("\n".join("".join("#" if v else "." for v in row) for row in inside))
