"""Short-LDPC decoding workbench: weighted BP-RNN decoding, absorbing-set
enumeration and classification, per-error-class training, decoder
diversity, OSD post-processing, and a Monte Carlo FER harness."""

from . import (absorbing, bp, channel, codes, diversity, harness, osd,
               tanner, training)

__all__ = ["absorbing", "bp", "channel", "codes", "diversity", "harness",
           "osd", "tanner", "training"]

__version__ = "0.1.0"
