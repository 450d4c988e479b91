#!/usr/bin/env python3
"""
Result persistence for tcrystal
Writes trajectories, tables and reports as CSV / JSON files under one output directory
"""

import csv
import json
import logging
from pathlib import Path

import numpy as np

from .collision import TrajectoryRecord
from .errors import InvalidStateError

logger = logging.getLogger(__name__)


def _cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _json_default(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, complex):
        return [value.real, value.imag]
    raise TypeError(f"Cannot serialise {type(value).__name__}")


class ResultStore:
    def __init__(self, out_dir):
        """Create the output directory if needed"""
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.written = []
        logger.info(f"📁 Writing results to {self.out_dir}")

    def _register(self, path: Path) -> Path:
        self.written.append(str(path))
        logger.debug(f"📁 Wrote {path}")
        return path

    def write_table(self, name, header, rows) -> Path:
        """Generic CSV; floats use repr so identical runs give identical bytes"""
        path = self.out_dir / f"{name}.csv"
        with open(path, 'w', newline='') as handle:
            writer = csv.writer(handle, lineterminator='\n')
            writer.writerow(header)
            for row in rows:
                writer.writerow([_cell(value) for value in row])
        return self._register(path)

    def write_json(self, name, payload) -> Path:
        path = self.out_dir / f"{name}.json"
        with open(path, 'w') as handle:
            json.dump(payload, handle, indent=2, sort_keys=True, default=_json_default)
            handle.write('\n')
        return self._register(path)

    def write_trajectory(self, name, record: TrajectoryRecord) -> Path:
        """`name.csv` with columns t, observables... plus a `name.json` sidecar"""
        from tcrystal import __version__

        names = list(record.observables)
        columns = [record.times] + [record.observables[n] for n in names]
        path = self.write_table(name, ['t'] + names, zip(*columns))
        self.write_json(name, {
            'engine': record.engine,
            'seed': record.seed,
            'collision_count': record.collision_count,
            'config': record.config,
            'version': __version__,
        })
        return path

    def read_trajectory(self, path) -> TrajectoryRecord:
        """Load a trajectory written by write_trajectory"""
        path = Path(path)
        with open(path, newline='') as handle:
            rows = list(csv.reader(handle))
        if not rows or rows[0][0] != 't':
            raise InvalidStateError(f"{path} is not a trajectory table")
        header, body = rows[0], np.array(rows[1:], dtype=float).reshape(-1, len(rows[0]))
        sidecar = {}
        meta_path = path.with_suffix('.json')
        if meta_path.exists():
            with open(meta_path) as handle:
                sidecar = json.load(handle)
        return TrajectoryRecord(
            times=body[:, 0],
            observables={n: body[:, i + 1] for i, n in enumerate(header[1:])},
            seed=int(sidecar.get('seed', 0)),
            collision_count=int(sidecar.get('collision_count', 0)),
            config=sidecar.get('config', {}),
            engine=sidecar.get('engine', 'collision'),
        )
