"""
Diarization scoring: collars, mapping and per-speaker error
===========================================================
"""

from spkeval import (
    Annotation,
    Turn,
    der,
    evaluate_corpus,
    format_corpus_report,
    hungarian_assignment,
    jer,
    overlap_matrix,
)

# ## The one-turn worked example
#
# Reference speaker A talks for ten seconds, the system credits its
# speaker X with the first eight. The missed tail costs 2 s out of 10,
# a 20% error rate. With a quarter-second collar the boundaries are
# forgiven on both sides: 1.75 s missed out of 9.5 s scored.

ref = Annotation("session", (Turn(onset=0.0, duration=10.0, speaker_id="A", file_id="session"),))
hyp = Annotation("session", (Turn(onset=0.0, duration=8.0, speaker_id="X", file_id="session"),))

strict = der(ref, hyp, collar=0.0)
print(f"collar 0.00: DER {100.0 * strict.der:.2f}%  "
      f"(miss {strict.miss:.2f}s of {strict.reference_total:.2f}s)")
forgiving = der(ref, hyp, collar=0.25)
print(f"collar 0.25: DER {100.0 * forgiving.der:.2f}%  "
      f"(miss {forgiving.miss:.2f}s of {forgiving.reference_total:.2f}s)")
print(f"JER: {100.0 * jer(ref, hyp).jer:.2f}%")

# ## Speaker mapping on a harder file
#
# Two reference speakers overlap in the middle; the system found three.
# The mapping keeps one hypothesis speaker per reference speaker, chosen
# to maximize attributed time; the leftover speaker becomes false alarm.

ref2 = Annotation("meeting", (
    Turn(onset=0.0, duration=6.0, speaker_id="ann", file_id="meeting"),
    Turn(onset=4.0, duration=6.0, speaker_id="ben", file_id="meeting"),
))
hyp2 = Annotation("meeting", (
    Turn(onset=0.0, duration=5.0, speaker_id="s1", file_id="meeting"),
    Turn(onset=5.0, duration=5.0, speaker_id="s2", file_id="meeting"),
    Turn(onset=2.0, duration=2.0, speaker_id="s3", file_id="meeting"),
))

matrix = overlap_matrix(ref2, hyp2)
print("\noverlap seconds (reference x hypothesis):")
print("      " + "  ".join(f"{h:>4}" for h in matrix.hyp_speakers))
for i, r in enumerate(matrix.ref_speakers):
    cells = "  ".join(f"{matrix.seconds[i, j]:4.1f}" for j in range(len(matrix.hyp_speakers)))
    print(f"  {r:>4}  {cells}")

mapping = hungarian_assignment(matrix)
print(f"chosen mapping: {dict(mapping.pairs)}")

result = der(ref2, hyp2, collar=0.0)
print(f"DER {100.0 * result.der:.2f}%: miss {result.miss:.2f}s, "
      f"false alarm {result.fa:.2f}s, confusion {result.conf:.2f}s")

# ## A corpus is pooled by seconds, not averaged by file

refs = {"session": ref, "meeting": ref2}
hyps = {"session": hyp, "meeting": hyp2}
corpus = evaluate_corpus(refs, hyps, collar=0.0)
print()
print(format_corpus_report(corpus), end="")
