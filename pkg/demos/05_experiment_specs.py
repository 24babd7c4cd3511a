"""
Running experiment spec files
=============================

Sweeps are described by small INI files. Eight are bundled (fig2 ... fig9);
the same runs are available from the shell as ``ris-lab sweep --config fig3``.
"""

import sys
import tempfile
from dataclasses import replace

from ris_lab.experiments import bundled_spec_names, load_spec, run_experiment, serialize_spec, write_outputs

print("bundled specs:", ", ".join(bundled_spec_names()))
spec = load_spec("fig3")
print(serialize_spec(spec))

# a coarser sweep than the bundled one keeps this quick
spec = replace(spec, sweep=replace(spec.sweep, step=10))
rows = run_experiment(spec)
out = sys.argv[1] if len(sys.argv) > 1 else tempfile.mkdtemp()
csv_path, gp_path = write_outputs(spec, rows, out)
print(csv_path.read_text())
print(f"plot with: gnuplot {gp_path}")
