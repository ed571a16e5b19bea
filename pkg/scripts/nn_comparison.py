#!/usr/bin/env python3
"""Compare exact vs. approximate product tables on the exported networks.

Requires the trainer artifacts in artifacts/ (run
`lutnn-trainer export-all --out-dir artifacts` first).  Reports
classification accuracy and denoising PSNR/SSIM for each table.

Usage:  python3 scripts/nn_comparison.py [--artifacts artifacts] [--limit 500]
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from approxmul.dataio import read_idx, read_pgm
from approxmul.metrics import build_product_lut
from approxmul.multiplier import Family, MultiplierConfig
from approxmul.nn import WeightBundle, infer, quantize_image
from approxmul.quality import ImagePair, psnr, ssim

LUTS = {
    "exact": build_product_lut(MultiplierConfig(Family.EXACT)),
    "proposed": build_product_lut(MultiplierConfig(Family.PROPOSED_FULL_APPROX)),
    "design1": build_product_lut(MultiplierConfig(Family.DESIGN1_HYBRID)),
}


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--artifacts", type=Path, default=Path("artifacts"))
    parser.add_argument("--limit", type=int, default=500)
    args = parser.parse_args()

    needed = ["classifier_bundle.json", "test_images.idx", "test_labels.idx",
              "denoiser_bundle.json", "denoise_test.pgm"]
    missing = [n for n in needed if not (args.artifacts / n).exists()]
    if missing:
        sys.exit(f"missing artifacts: {missing}; run "
                 "`lutnn-trainer export-all --out-dir artifacts` first")

    clf = WeightBundle.load(args.artifacts / "classifier_bundle.json")
    images = read_idx(args.artifacts / "test_images.idx")[: args.limit]
    labels = read_idx(args.artifacts / "test_labels.idx")[: args.limit]
    print(f"classification ({len(images)} images):")
    for name, lut in LUTS.items():
        correct = sum(
            int(infer(clf, quantize_image(img), lut) == int(lab))
            for img, lab in zip(images, labels)
        )
        print(f"  {name:<10} accuracy {100.0 * correct / len(images):6.2f}%")

    dnz = WeightBundle.load(args.artifacts / "denoiser_bundle.json")
    clean = read_pgm(args.artifacts / "denoise_test.pgm")
    for sigma in (25.0, 50.0):
        rng = np.random.default_rng(42)
        noisy = np.clip(
            clean.astype(np.float64) + rng.normal(0, sigma, clean.shape), 0, 255
        ).astype(np.uint8)
        print(f"denoising sigma={sigma:.0f} "
              f"(noisy PSNR {psnr(ImagePair(clean, noisy)):.2f} dB):")
        for name, lut in LUTS.items():
            out_q = infer(dnz, quantize_image(noisy), lut)
            restored = np.clip(
                np.rint(out_q.dequantize()[0] * 255.0), 0, 255
            ).astype(np.uint8)
            pair = ImagePair(clean, restored)
            print(f"  {name:<10} PSNR {psnr(pair):6.2f} dB  SSIM {ssim(pair):.4f}")


if __name__ == "__main__":
    main()
