"""
Helper functions shared across the CaseContext pipeline.
"""
import hashlib
import json
import re
from importlib import resources
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Union

import pandas as pd

PathLike = Union[str, Path]

_WORD_RE = re.compile(r"[^\W\d_]+")


def whitespace_tokens(text: str) -> List[str]:
    """
    Split text into whitespace-delimited tokens.

    Args:
        text (str): Input text.

    Returns:
        List[str]: Tokens in order.
    """
    return text.split()


def count_tokens(text: str) -> int:
    """
    Count whitespace-delimited tokens, the token unit used for corpus
    statistics and context budgets.
    """
    return len(text.split())


def word_tokens(text: str) -> List[str]:
    """
    Extract lowercased alphabetic words (accented letters included).

    Args:
        text (str): Input text.

    Returns:
        List[str]: Lowercased words.
    """
    return _WORD_RE.findall(text.lower())


def canonical_json(value: Any) -> str:
    """
    Serialize a value to a canonical JSON string (sorted keys, no spaces).
    """
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def content_hash(value: Any) -> str:
    """
    Hash a JSON-serializable value or a string to a hex SHA-256 digest.

    Args:
        value (Any): A string is hashed as UTF-8; anything else through
            its canonical JSON form.

    Returns:
        str: Hex digest.
    """
    text = value if isinstance(value, str) else canonical_json(value)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def file_hash(path: PathLike) -> str:
    """
    Hash a file's bytes with SHA-256.
    """
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def read_jsonl(path: PathLike) -> Iterator[Dict[str, Any]]:
    """
    Iterate over the records of a line-delimited JSON file, skipping blank lines.
    """
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                yield json.loads(line)


def write_jsonl(path: PathLike, records: Iterable[Dict[str, Any]]) -> None:
    """
    Write records as line-delimited JSON, creating parent directories.

    Records keep their key order so files are reproducible byte for byte.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for record in records:
            handle.write(json.dumps(record, ensure_ascii=False))
            handle.write("\n")


def write_json(path: PathLike, value: Any) -> None:
    """
    Write a JSON document with sorted keys and a trailing newline.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        json.dump(value, handle, indent=2, sort_keys=True, ensure_ascii=False)
        handle.write("\n")


def read_json(path: PathLike) -> Any:
    """
    Read a JSON document.
    """
    with open(path, "r", encoding="utf-8") as handle:
        return json.load(handle)


def load_resource_lines(name: str) -> List[str]:
    """
    Load a word list shipped in ``casecontext/resources``.

    Blank lines and lines starting with ``#`` are ignored.

    Args:
        name (str): File name inside the resources directory.

    Returns:
        List[str]: Stripped entries in file order.
    """
    text = resources.files("casecontext").joinpath("resources", name).read_text(encoding="utf-8")
    return [line.strip() for line in text.splitlines() if line.strip() and not line.startswith("#")]


def convert_to_dataframe(data_list: List[Any]) -> pd.DataFrame:
    """
    Convert a list of dataclass instances or dictionaries to a pandas DataFrame.

    Nested dataclasses and dictionaries are flattened into dotted column names.

    Args:
        data_list (List[Any]): List of dataclass instances or dictionaries.

    Returns:
        pd.DataFrame: DataFrame representation of the data.
    """
    if not data_list:
        return pd.DataFrame()

    flattened_dicts = []
    for item in data_list:
        data_dict = item if isinstance(item, dict) else vars(item)
        flattened_dict: Dict[str, Any] = {}
        _flatten_dict(data_dict, flattened_dict)
        flattened_dicts.append(flattened_dict)

    return pd.DataFrame(flattened_dicts)


def _flatten_dict(nested_dict: Dict[str, Any], flattened_dict: Dict[str, Any], prefix: str = '') -> None:
    """
    Recursively flatten a nested dictionary.

    Args:
        nested_dict (Dict[str, Any]): The nested dictionary to flatten.
        flattened_dict (Dict[str, Any]): The output flattened dictionary.
        prefix (str, optional): Prefix for keys in the flattened dictionary.
    """
    for key, value in nested_dict.items():
        new_key = f"{prefix}.{key}" if prefix else key

        if hasattr(value, '__dataclass_fields__'):
            _flatten_dict(vars(value), flattened_dict, new_key)
        elif isinstance(value, dict):
            _flatten_dict(value, flattened_dict, new_key)
        else:
            flattened_dict[new_key] = value
