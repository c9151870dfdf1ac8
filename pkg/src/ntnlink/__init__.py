"""ntnlink: link-level simulator for LEO-satellite uplink OFDM with a
CNN-LSTM slot-ahead channel predictor."""

__version__ = "0.1.0"
