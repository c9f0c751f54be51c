"""A bounded decider meets the program built to contradict it.

Run: python demos/diagonal.py
"""

from haltlab.guest import (
    GuestVerdict,
    assemble,
    encode,
    execute,
    make_constant_decider,
    quine_transform,
)
from haltlab.harness import diagonalize

quine = quine_transform(assemble("SELF r0\nEMIT r0\nHALT\n"))
run = execute(quine, b"", 100)
print(f"quine prints its own {len(run.output)}-byte encoding: {run.output == encode(quine)}")

for T in (0, 3, 10):
    print(f"\nD_{T} against X:")
    for line in diagonalize(T).lines():
        print("  " + line)

print("\nA decider that always says HALTS:")
for line in diagonalize(0, decider=make_constant_decider(GuestVerdict.HALTS), loop_horizon=500).lines()[1:]:
    print("  " + line)
