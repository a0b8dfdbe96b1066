"""Smoke test for the raga_markov_py extension module."""

import raga_markov_py as rm

ab = rm.Alphabet.bageshree()
assert ab.symbols == ["S", "R", "g", "M", "P", "D", "n"]
assert ab.parse("DnS") == ["D", "n", "S"]

m1 = rm.Model.bageshree(1)
m2 = rm.Model.bageshree(2)
assert m2.prob("DS", "n") == (4, 9)
assert m2.class_row("SM")[:4] == [("0", "1/10"), ("1/10", "1/10"), ("1/10", "9/10"), ("9/10", "1")]
assert m2.sparsity() > 0.4
assert m1.is_ergodic() and m1.is_regular()

report = m1.analyze()
w = dict(zip(report["states"], report["stationary"]))
assert abs(w["D"] - 0.242678) < 5e-6, w

notes = rm.generate([m1, m2], 200, seed=3)
assert len(notes) == 200 and notes[0] == "S"
assert notes == rm.generate([m2, m1], 200, seed=3)
assert rm.pitch_track(["D", "n", "S"], tonic=0) == [-3, -2, 0]

fitted = rm.Model.estimate(["SRgMPDnS", "SnDPMgRS"], 1)
assert fitted.order == 1 and fitted.prob("S", "R") == (1, 2)

print("smoke test ok:", "".join(notes[:40]))
