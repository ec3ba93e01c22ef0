"""Experiment reports: deterministic tables, verdict summary, disk layout.

A run writes ``<output_dir>/<run_id>/`` with one CSV per suite plus
``verdicts.json``; the run id is a content hash of the config and the build
version, so identical configs land in identical locations with identical
bodies.  Timing is kept out of the hashed/canonical body.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
from dataclasses import dataclass, field

CSV_COLUMNS = ["suite", "assertion", "symbol", "truncation", "value", "threshold", "verdict"]

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"


@dataclass
class Row:
    suite: str
    assertion: str
    symbol: str
    truncation: str
    value: float
    threshold: float
    verdict: str

    def as_list(self):
        return [
            self.suite,
            self.assertion,
            self.symbol,
            self.truncation,
            f"{self.value:.12g}",
            f"{self.threshold:.12g}",
            self.verdict,
        ]


def check(value: float, threshold: float, *, larger_ok: bool = False) -> str:
    ok = value >= threshold if larger_ok else value <= threshold
    return PASS if ok else FAIL


@dataclass
class ExperimentReport:
    run_id: str
    config_echo: dict
    rows: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)
    timing: dict = field(default_factory=dict)

    def add(self, suite, assertion, symbol, truncation, value, threshold, verdict):
        self.rows.append(
            Row(suite, assertion, symbol, str(truncation), float(value), float(threshold), verdict)
        )

    def sorted_rows(self):
        return sorted(self.rows, key=lambda r: (r.suite, r.assertion, r.symbol, r.truncation))

    def verdict_counts(self):
        out = {PASS: 0, FAIL: 0, INCONCLUSIVE: 0}
        for r in self.rows:
            out[r.verdict] = out.get(r.verdict, 0) + 1
        return out

    def exit_status(self) -> int:
        counts = self.verdict_counts()
        if counts[FAIL]:
            return 1
        if counts[INCONCLUSIVE]:
            return 2
        return 0

    def suite_csv(self, suite: str) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in self.sorted_rows():
            if r.suite == suite:
                writer.writerow(r.as_list())
        return buf.getvalue()

    def body(self) -> dict:
        return {
            "run_id": self.run_id,
            "rows": [r.as_list() for r in self.sorted_rows()],
            "notes": self.notes,
            "verdicts": self.verdict_counts(),
        }

    def write(self, output_dir: str) -> str:
        run_dir = os.path.join(output_dir, self.run_id)
        os.makedirs(run_dir, exist_ok=True)
        suites = sorted({r.suite for r in self.rows})
        for suite in suites:
            with open(os.path.join(run_dir, f"{suite}.csv"), "w") as fh:
                fh.write(self.suite_csv(suite))
        with open(os.path.join(run_dir, "verdicts.json"), "w") as fh:
            json.dump(self.body(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        with open(os.path.join(run_dir, "config.json"), "w") as fh:
            json.dump(self.config_echo, fh, indent=2, sort_keys=True)
            fh.write("\n")
        if self.timing:
            with open(os.path.join(run_dir, "timing.json"), "w") as fh:
                json.dump(self.timing, fh, indent=2, sort_keys=True)
                fh.write("\n")
        return run_dir


def run_id_for(config_raw: dict, build_version: str) -> str:
    canon = json.dumps(config_raw, sort_keys=True, separators=(",", ":"))
    digest = hashlib.sha256((canon + "|" + build_version).encode()).hexdigest()
    return digest[:16]
