"""phenoseg: weakly-supervised segmentation of satellite image time series.

Sparse point labels plus a co-registered image time series go in; dense
multi-class maps come out, via a temporal branch (trend/event decomposition
over a frozen encoder), a spatial branch (temporal-constrained region growing
that densifies the points into pseudo-labels), and an alignment loss tying
the two prediction heads together.
"""

__version__ = "0.1.0"
