"""Certify a run against its predicted rate.

The verdict is PASS when every cycle contracts at least as fast as the
predicted rho and the fitted rate stays under the prediction plus a
margin. A prediction of rho >= 1 makes the check NOT-APPLICABLE.
"""

from gdrkit.cli import certify
from gdrkit.config import resolve_run_config

for name in ("two-lines-30deg", "two-lines-80deg", "perpendicular-hyperplanes", "epi-abs-axis"):
    inst, st = resolve_run_config({"instance": name}, {})
    report, _ = certify(inst, st)
    pred = report["predicted"]
    print(f"{name:27s} {report['verdict']:15s} rho={pred['rho']:.5f} "
          f"fitted={report['empirical']['fitted']['rate']:.5f}")
