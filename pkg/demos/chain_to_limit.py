"""Watch the observation chain of a halting machine grow into its limit.

Run: python demos/chain_to_limit.py
"""

from haltlab import fixtures
from haltlab.fixpoint import HaltingOperator, check_fixed_point, fixed_points_pruned, iterate_chain, make_p_omega

machine = fixtures.tm("m_count3")  # halts at step 6 on every input
inp = machine.default_input()
op = HaltingOperator(machine, inp)

print("Each stage knows one more step than the previous one:")
record = iterate_chain(machine, inp, 9, operator=op)
for i, stage in enumerate(record.stages):
    check = check_fixed_point(op, stage)
    print(f"  p_{i:<2} {str(stage):<26} ticks={record.ledger_per_stage[i].total:<2} "
          f"fixed point? {check.fixed} (F defines index {check.witness})")

limit = make_p_omega(machine, inp, fuel=64)
print(f"\nLimit of the chain: {limit}")
print(f"F(limit) == limit: {bool(check_fixed_point(op, limit))}")

found = fixed_points_pruned(op, 9)
print(f"Fixed points with entries on 0..8: {[str(q) for q in found]}")

looper = fixtures.tm("m_loop")
print(f"\nA machine that never halts: {make_p_omega(looper, looper.default_input(), fuel=200)}")
