"""Training side of the quantized-inference toolchain.

Produces versioned WeightBundle JSON files, IDX image/label fixtures, and
PGM test images consumed by the inference engine strictly through those
file formats -- the two packages share no code.
"""

__version__ = "0.1.0"
