import os
import json
import math
import numpy as np
import pandas as pd

CSV_FLOAT_FORMAT = "%.17g"


def ensure_directory_exists(directory_path):
    """Ensure directory exists, create if it doesn't"""
    if not directory_path:
        return False
    created = not os.path.isdir(directory_path)
    os.makedirs(directory_path, exist_ok=True)
    return created


def encode_complex(value):
    """Complex scalar as {"re", "im"}"""
    value = complex(value)
    return {"re": value.real, "im": value.imag}


def decode_complex(value):
    """Accept {"re", "im"} or a plain real number"""
    if isinstance(value, dict):
        if set(value) != {"re", "im"}:
            raise ValueError(f"complex value must have exactly the keys re and im, got {sorted(value)}")
        return complex(float(value["re"]), float(value["im"]))
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"expected a number or {{re, im}}, got {type(value).__name__}")
    return complex(float(value))


def to_jsonable(value):
    """Recursively convert numpy arrays and complex numbers for json.dump"""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return encode_complex(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else str(value)
    return value


def dump_json(data, indent=2):
    """Deterministic JSON text"""
    return json.dumps(to_jsonable(data), indent=indent, sort_keys=True)


def write_table(frame, path=None):
    """
    Write a DataFrame as CSV with 17 significant digits
    Args:
        frame: pandas DataFrame
        path: Output file (None returns the text)
    Returns:
        CSV text when path is None, else the path
    """
    if path is None:
        return frame.to_csv(index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    ensure_directory_exists(os.path.dirname(path))
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    return path


def eigenvalue_table(eigenvalues):
    """Rows (re, im, multiplicity) for a list of (value, multiplicity)"""
    rows = [{"re": complex(v).real, "im": complex(v).imag, "multiplicity": int(m)} for v, m in eigenvalues]
    return pd.DataFrame(rows, columns=["re", "im", "multiplicity"])


def parse_complex(text):
    """Parse '1.5', '2+3j' or '2+3i'"""
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise ValueError(f"expected a complex number such as 2+3j, got '{text}'")


def frame_for_csv(frame):
    """Split every complex column of a DataFrame into _re and _im columns"""
    frame = frame.copy()
    for column in list(frame.columns):
        if frame[column].dtype == object or np.iscomplexobj(frame[column].to_numpy()):
            values = frame[column].to_numpy()
            if any(isinstance(v, (complex, np.complexfloating)) for v in values):
                index = list(frame.columns).index(column)
                values = np.asarray(values, dtype=complex)
                frame = frame.drop(columns=column)
                frame.insert(index, f"{column}_re", values.real)
                frame.insert(index + 1, f"{column}_im", values.imag)
    return frame


def parse_float_list(text):
    """Parse 'a,b,c' into floats"""
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ValueError(f"expected comma-separated numbers, got '{text}'")
