"""A patched quantum GAN: four 16-outcome circuits each paint two rows of an 8x8 digit.

    python demos/03_patched_gan.py [digit] [iterations]
"""

import sys

import numpy as np

from adeqnn.tasks import qgan

digit = int(sys.argv[1]) if len(sys.argv) > 1 else 0
iters = int(sys.argv[2]) if len(sys.argv) > 2 else 100

res = qgan.train_qgan(digit, qgan.QganHyper(iters=iters), seed=0)
w = res.record.metrics
print(f"batch Wasserstein estimate: first 10 mean {w[:10].mean():.3f}, last 10 mean {w[-10:].mean():.3f}")
print(f"SSIM vs class mean {res.ssim_vs_prototype:.3f}, vs nearest real digit {res.ssim_vs_nearest:.3f}")

shades = " .:-=+*#%@"


def show(img):
    for row in np.asarray(img).reshape(8, 8):
        print("".join(shades[min(int(v * 10), 9)] * 2 for v in row))


print("\nclass mean")
show(res.prototype / res.prototype.max())
last = max(res.snapshots)
for k, img in enumerate(res.snapshots[last][:2]):
    print(f"\nsample {k} after {last} iterations")
    show(img)
