"""Boundary-corrected density estimation on a compact support.

Samples that pile up near an endpoint of their support are a worst case
for plain kernel smoothing: part of every kernel bump sticks out of the
support and the estimate sags exactly where the data concentrate. This
script estimates the same boundary-heavy sample with and without the
correction and prints what happens to the mass near zero.

Run from the repository root:

    python demos/01_boundary_corrected_density.py
"""

from pathlib import Path

import numpy as np

from wasserscan import RawSample, boundary_weight, estimate_density

OUT_DIR = Path(__file__).parent / "output"


def main():
    rng = np.random.default_rng(2020)

    # A sample hugging the lower boundary, like early-epidemic rates.
    values = rng.beta(1, 15, 800)
    sample = RawSample(values)
    h = 0.06

    corrected = estimate_density(sample, bandwidth=h)
    plain = estimate_density(sample, bandwidth=h, boundary_correction=False)

    print("sample: 800 draws from Beta(1, 15), bandwidth", h)
    print(f"mass within one bandwidth of 0 (truth ~{(1 - (1 - h) ** 15):.3f}):")
    edge = corrected.grid <= h
    for label, d in [("corrected", corrected), ("uncorrected", plain)]:
        mass = np.trapezoid(d.values[edge], d.grid[edge])
        print(f"  {label:>12}: {mass:.3f}   density at 0: {d.values[0]:.2f}")

    print("\nboundary weights grow toward the endpoint:")
    for x in (0.0, 0.02, 0.04, 0.06, 0.5):
        print(f"  w({x:.2f}, h={h}) = {boundary_weight(x, h):.4f}")

    print("\nboth estimates integrate to one by construction:")
    for label, d in [("corrected", corrected), ("uncorrected", plain)]:
        print(f"  {label:>12}: {np.trapezoid(d.values, d.grid):.9f}")

    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("\nmatplotlib not available; skipping the figure")
        return

    OUT_DIR.mkdir(exist_ok=True)
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.hist(values, bins=60, density=True, alpha=0.3, color="gray", label="sample")
    ax.plot(corrected.grid, corrected.values, label="boundary corrected")
    ax.plot(plain.grid, plain.values, "--", label="uncorrected")
    ax.set_xlim(0, 0.4)
    ax.set_xlabel("x")
    ax.set_ylabel("density")
    ax.legend()
    fig.tight_layout()
    path = OUT_DIR / "boundary_correction.png"
    fig.savefig(path, dpi=120)
    print(f"\nfigure saved to {path}")


if __name__ == "__main__":
    main()
