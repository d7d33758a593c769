"""Plot throughput and PER against SNR for one or more metrics CSVs.

Usage: python scripts/plot_csv.py OUT.png CSV...   (needs the "plot" extra)
"""
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from nckscma.harness import read_csv  # noqa: E402


def main(out, paths):
    fig, (ax_t, ax_p) = plt.subplots(1, 2, figsize=(10, 4))
    for p in paths:
        rows = read_csv(p)
        snr = [r["snr_db"] for r in rows]
        ax_t.errorbar(snr, [r["throughput"] for r in rows], yerr=[r["ci95_per"] for r in rows],
                      marker="o", capsize=3, label=Path(p).stem)
        per = [max(r["per"], 1e-5) for r in rows]
        ax_p.semilogy(snr, per, marker="o", label=Path(p).stem)
    ax_t.set(xlabel="SNR (dB)", ylabel="throughput")
    ax_p.set(xlabel="SNR (dB)", ylabel="PER")
    for ax in (ax_t, ax_p):
        ax.grid(True, which="both", alpha=0.3)
        ax.legend()
    fig.tight_layout()
    fig.savefig(out, dpi=120)


if __name__ == "__main__":
    if len(sys.argv) < 3:
        sys.exit(__doc__)
    main(sys.argv[1], sys.argv[2:])
