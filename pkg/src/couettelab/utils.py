# -*- coding: utf-8 -*-
# (c) Couettelab Developers 2026

import csv
import os
import sys
from typing import Any, Iterable, List, Optional, Sequence, TextIO

from colorama import Fore
from tqdm import tqdm

from .config import config


def disable_tqdm() -> bool:
    # Disable progress bar if debug is on, or it's not a terminal
    return bool(config.debug or not sys.stdout.isatty())


def cl_tqdm_write(s: str, end: str = "\n", file: Optional[TextIO] = None) -> None:
    tqdm.write(s, end=end, file=file)


def debug_print(*args: Any) -> None:
    if config.debug:
        cl_tqdm_write(f"{Fore.YELLOW}" + " ".join(map(str, args)))


def get_output_filename(filename: str) -> str:
    filepath, file_extension = os.path.splitext(filename)
    final_filepath = filepath
    i = 1
    while os.path.exists(final_filepath + file_extension):
        i += 1
        final_filepath = f"{filepath}-{i}"
    return final_filepath + file_extension


def write_csv(
    filename: str,
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
    quiet: bool = False,
    overwrite: bool = False,
) -> str:
    if not overwrite:
        filename = get_output_filename(filename)
    directory = os.path.dirname(filename)
    if directory and not os.path.exists(directory):
        os.makedirs(directory)

    with open(filename, "w", newline="", encoding="utf-8") as csv_file:
        writer = csv.writer(csv_file, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format_cell(cell) for cell in row])

    if not quiet:
        cl_tqdm_write(f"{Fore.WHITE}export file created: {Fore.YELLOW}{os.path.abspath(filename)}")
    return filename


def read_csv(filename: str) -> List[List[str]]:
    with open(filename, newline="", encoding="utf-8") as csv_file:
        return list(csv.reader(csv_file))


def _format_cell(cell: Any) -> Any:
    if isinstance(cell, float):
        return repr(cell)
    return cell


def is_compiled() -> bool:
    return "__compiled__" in globals()
