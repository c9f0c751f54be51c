"""The verdict tick: a bounded run that has not halted always costs T+1.

Run: python demos/overhead.py
"""

from haltlab import fixtures
from haltlab.harness import overhead_table

for name, inp in [("m_loop", None), ("m_halt2", ())]:
    m = fixtures.tm(name)
    rows = overhead_table(m, m.default_input() if inp is None else inp, range(8))
    print(f"{name}:")
    for r in rows:
        print(f"  T={r.bound}  {str(r.verdict):<13} total={r.ledger.total}  (T+1={r.bound + 1})")
