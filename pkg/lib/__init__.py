"""lib package

Message passing and replica theory for blind calibration and dictionary
learning. The numerical modules live in subpackages (`lib.amp`,
`lib.theory`, `lib.instance`) and flat modules (`lib.denoisers`,
`lib.metrics`); `lib.cli` ties them into reproducible experiments.
"""

__version__ = "1.0.0"
