"""Named machines used by tests, demos and the suite."""

from __future__ import annotations

from .guest import GuestProgram, assemble
from .tm import MachineSpec, parse_machine

M_HALT0 = """\
# starts in its halt state
states: qh
alphabet: _
blank: _
start: qh
halt: qh
"""

M_HALT2 = """\
# two moves right, then halt
states: q0 q1 qh
alphabet: _
blank: _
start: q0
halt: qh
q0 _ -> q1 _ R
q1 _ -> qh _ R
"""

M_HALT1 = """\
# one move, then halt
states: q0 qh
alphabet: _ 1
blank: _
start: q0
halt: qh
q0 _ -> qh _ R
q0 1 -> qh 1 R
"""

M_LOOP = """\
# single-state right-mover, never halts
states: q0 qh
alphabet: _ 1
blank: _
start: q0
halt: qh
q0 _ -> q0 _ R
q0 1 -> q0 1 R
"""

M_BOUNCE = """\
# ping-pongs between two cells forever
states: a b qh
alphabet: _ 1
blank: _
start: a
halt: qh
a _ -> b 1 R
a 1 -> b 1 R
b _ -> a _ L
b 1 -> a 1 L
"""

M_COUNT3 = """\
# writes three 1s, walks back over them, halts at step 6
states: w1 w2 w3 back qh
alphabet: _ 1
blank: _
start: w1
halt: qh
w1 _ -> w2 1 R
w1 1 -> w2 1 R
w2 _ -> w3 1 R
w2 1 -> w3 1 R
w3 _ -> back 1 L
w3 1 -> back 1 L
back 1 -> back 1 L
back _ -> qh _ R
"""

G_HALT = "HALT\n"
G_LOOP = "LOOP\n"
G_INC_HALT = "INC r1\nHALT\n"
G_IDENTITY = "EMIT r0\nHALT\n"
G_COUNTDOWN = """\
# halts after counting r1 down from 5
    LOAD r1 5
top:
    JZ r1 done
    DEC r1
    JMP top
done:
    HALT
"""


def tm(name: str) -> MachineSpec:
    return parse_machine(TM_TEXTS[name])


def guest(name: str) -> GuestProgram:
    return assemble(GUEST_TEXTS[name])


TM_TEXTS = {
    "m_halt0": M_HALT0,
    "m_halt1": M_HALT1,
    "m_halt2": M_HALT2,
    "m_loop": M_LOOP,
    "m_bounce": M_BOUNCE,
    "m_count3": M_COUNT3,
}

GUEST_TEXTS = {
    "halt": G_HALT,
    "loop": G_LOOP,
    "inc_halt": G_INC_HALT,
    "identity": G_IDENTITY,
    "countdown": G_COUNTDOWN,
}

# halting step on every input, and the fixtures that provably never halt
HALTING_TM = {"m_halt0": 0, "m_halt1": 1, "m_halt2": 2, "m_count3": 6}
NON_HALTING_TM = ("m_loop", "m_bounce")
HALTING_GUEST = {"halt": 0, "inc_halt": 1, "countdown": 17}
NON_HALTING_GUEST = ("loop",)
