import re

import numpy as np
import pandas as pd

from .errors import ParseError

HEADER_KEYS = ("dim", "r", "ehf")


def number_label_formatter(number, alternative_idx=0, truncate=3):
    """Formats a number to a short label usable in case names."""
    # if the number is an integer, just return it as a string
    if isinstance(number, (int, np.integer)):
        return str(number)
    try:
        string = "{:.{prec}}".format(float(number), prec=truncate)
    # if the value is not a number, use the alternative_idx
    except TypeError:
        string = str(alternative_idx)
    except ValueError:
        string = str(alternative_idx)
    string = string.replace(".", "d")
    return string


def update_nested_dict(nested_dict, key_chain, value):
    """
    Updates a nested dictionary with a value given a chain of keys.

    Parameters
    ----------
    nested_dict
        The nested dictionary to update.
    key_chain : str
        The chain of keys to access the value to update, e.g. 'config/n_r'.
    value
        The value to update.

    Raises
    ------
    KeyError
        If the key is not found in the dictionary.
    """
    keys = key_chain.split("/")
    current_dict = nested_dict
    for key in keys[:-1]:
        if key not in current_dict:
            raise KeyError(f"Key '{key}' not found in dictionary")
        current_dict = current_dict[key]
        if not isinstance(current_dict, dict):
            raise ValueError(f"Key '{key}' is not a dictionary")
    current_dict[keys[-1]] = value


# Define a custom representer for integers
def int_representer(dumper, data):
    return dumper.represent_scalar("tag:yaml.org,2002:int", str(data))


# Define a custom representer for floats
def float_representer(dumper, data):
    return dumper.represent_scalar("tag:yaml.org,2002:float", format(data))


# Define a custom representer for NumPy numerical types
def numpy_scalar_representer(dumper, data):
    if isinstance(data, np.integer):
        return dumper.represent_scalar("tag:yaml.org,2002:int", str(int(data)))
    return dumper.represent_scalar("tag:yaml.org,2002:float", format(float(data)))


def flatten_dict(d, parent_key="", sep="/"):
    items = []
    for k, v in d.items():
        new_key = f"{parent_key}{sep}{k}" if parent_key else k
        if isinstance(v, dict):
            items.extend(flatten_dict(v, new_key, sep).items())
        else:
            items.append((new_key, v))
    return dict(items)


def insert_nested_dict_in_dataframe(df, nested_dict, extra_dict):
    """
    Inserts a flattened nested dictionary and additional key-value pairs into a DataFrame as a new row.
    """
    to_write_dict = {**flatten_dict(nested_dict), **extra_dict}
    df_new_row = pd.DataFrame([to_write_dict])
    if df is None or df.empty:
        return df_new_row
    return pd.concat([df, df_new_row], ignore_index=True)


def parse_int_list(text):
    """Parses '3..6' (inclusive) or '2,4,5' into a list of ints."""
    text = str(text).strip()
    match = re.fullmatch(r"(-?\d+)\s*\.\.\s*(-?\d+)", text)
    if match:
        low, high = int(match.group(1)), int(match.group(2))
        if high < low:
            raise ValueError(f"Empty range '{text}'.")
        return list(range(low, high + 1))
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise ValueError(f"Cannot read '{text}' as a list of integers.") from e


def _read_numeric_file(path):
    """Splits a plain-text numeric file into headers and data rows.

    Returns the header dict (lower-case keys) and a list of
    (line number, [float, ...]) data rows. Lines starting with '#' and
    blank lines are skipped.
    """
    headers, rows = {}, []
    with open(path, "r", encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            tokens = stripped.split()
            key = tokens[0].lower()
            if key in HEADER_KEYS:
                if rows:
                    raise ParseError(path, line_number, f"header '{tokens[0]}' after data rows")
                if len(tokens) != 2:
                    raise ParseError(path, line_number, f"header '{tokens[0]}' needs one value")
                if key in headers:
                    raise ParseError(path, line_number, f"duplicate header '{tokens[0]}'")
                try:
                    headers[key] = int(tokens[1]) if key == "dim" else float(tokens[1])
                except ValueError:
                    raise ParseError(
                        path, line_number, f"invalid value '{tokens[1]}' for '{tokens[0]}'"
                    ) from None
                continue
            try:
                rows.append((line_number, [float(v) for v in tokens]))
            except ValueError:
                raise ParseError(path, line_number, f"non-numeric entry in '{stripped}'") from None
    if "dim" not in headers:
        raise ParseError(path, 1, "missing 'dim' header")
    if headers["dim"] < 1:
        raise ParseError(path, 1, f"'dim' must be positive, got {headers['dim']}")
    return headers, rows


def parse_matrix_file(path):
    """Reads a 'dim n' header followed by n rows of n reals.

    Returns
    -------
    headers : dict
        Header values keyed 'dim', 'r', 'ehf' (only those present).
    matrix : numpy.ndarray
        The n x n matrix.

    Raises
    ------
    ParseError
        With the offending line number on malformed content.
    """
    headers, rows = _read_numeric_file(path)
    n = headers["dim"]
    for line_number, row in rows:
        if len(row) != n:
            raise ParseError(path, line_number, f"expected {n} entries, found {len(row)}")
    if len(rows) != n:
        last = rows[-1][0] if rows else 1
        raise ParseError(path, last, f"expected {n} rows, found {len(rows)}")
    return headers, np.array([row for _, row in rows])


def parse_vector_file(path):
    """Reads a 'dim n' header followed by n reals, one or many per line."""
    headers, rows = _read_numeric_file(path)
    values = [v for _, row in rows for v in row]
    if len(values) != headers["dim"]:
        last = rows[-1][0] if rows else 1
        raise ParseError(
            path, last, f"expected {headers['dim']} entries, found {len(values)}"
        )
    return headers, np.array(values)


def format_vector(vector, decimals=5):
    """Compact text rendering of a real or complex vector."""
    vector = np.asarray(vector)
    if np.iscomplexobj(vector) and np.allclose(vector.imag, 0.0):
        vector = vector.real
    return "(" + ", ".join(f"{v:.{decimals}f}" for v in vector) + ")"


def write_dataframe(df, path, output_format="csv", rounding=None):
    """Writes a report table, rounding only at this point.

    Parameters
    ----------
    df : pandas.DataFrame
        The table.
    path : str or None
        Output file; None returns the text instead.
    output_format : str
        'csv' or 'json' (records orientation).
    rounding : dict, optional
        Column to number of decimals.
    """
    if rounding:
        df = df.round({k: v for k, v in rounding.items() if k in df.columns})
    if output_format == "csv":
        text = df.to_csv(path, index=False)
    elif output_format == "json":
        text = df.to_json(path, orient="records", indent=2)
    else:
        raise ValueError(f"Unknown output format '{output_format}'.")
    return text
