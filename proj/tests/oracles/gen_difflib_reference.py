"""Reference matching-block sizes from Python's difflib for random string pairs.

Writes tests/data/difflib_reference.tsv: a<TAB>b<TAB>matches<TAB>ratio
Strings use a small alphabet so long inputs exercise autojunk.
"""
import difflib
import random
import sys
from pathlib import Path

rng = random.Random(20240611)
rows = []
alphabets = ["ab", "abc ", "abcdefgh ", "etaoin shrdlu.,", "0123456789abcdefghijklmnopqrstuvwxyz "]
for i in range(600):
    alpha = alphabets[i % len(alphabets)]
    la = rng.choice([0, 1, 3, 10, 40, 120, 199, 200, 250, 420])
    lb = rng.choice([0, 1, 3, 10, 40, 120, 199, 200, 250, 420])
    a = "".join(rng.choice(alpha) for _ in range(la))
    if rng.random() < 0.5 and la > 0:
        b = list(a[:lb] if lb <= la else a + "".join(rng.choice(alpha) for _ in range(lb - la)))
        for _ in range(max(1, len(b) // 10)):
            if b:
                b[rng.randrange(len(b))] = rng.choice(alpha)
        b = "".join(b)
    else:
        b = "".join(rng.choice(alpha) for _ in range(lb))
    sm = difflib.SequenceMatcher(None, a, b)
    m = sum(blk.size for blk in sm.get_matching_blocks())
    rows.append(f"{a}\t{b}\t{m}\t{sm.ratio():.17g}")

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "data" / "difflib_reference.tsv"
out.write_text("# a\tb\tmatches\tratio (difflib.SequenceMatcher, autojunk on)\n" + "\n".join(rows) + "\n")
