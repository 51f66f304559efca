import pandas as pd

SPECTRUM_COLUMNS = ["k", "T", "R", "deficit", "status"]
PROBE_COLUMNS = ["time", "p_left", "p_center", "p_right", "total_norm"]


def spectrum_frame(result):
    """
    One row per grid point with columns k, T, R, deficit, status.
    Flagged points keep their row with NaN values.
    """
    rows = [
        (p.k, p.transmission, p.reflection, p.deficit, p.status.value)
        for p in result.entries
    ]
    return pd.DataFrame(rows, columns=SPECTRUM_COLUMNS)


def write_spectrum_csv(result, path):
    """Save a SpectrumResult; float repr keeps repeated runs byte-identical."""
    spectrum_frame(result).to_csv(path, index=False, float_format="%.17g")


def _read_floats(path, float_columns):
    frame = pd.read_csv(path, float_precision="round_trip")
    return frame.astype({column: float for column in float_columns})


def read_spectrum_csv(path):
    """Read a spectrum CSV back with every float bit-exact."""
    return _read_floats(path, SPECTRUM_COLUMNS[:-1])


def write_probe_csv(probes, path):
    """
    Save wavepacket probe rows (time, p_left, p_center, p_right, total_norm).
    """
    probes.to_csv(path, index=False, float_format="%.17g")


def read_probe_csv(path):
    return _read_floats(path, PROBE_COLUMNS)
