"""Brute-force reconstruction of adjective selection counts from reported
percentages. For every total N <= 60 and every 4-way split of N, keep the
splits whose percentages all lie within TOL percentage points of the
reported values (compared unrounded).

Usage: python3 adjective_counts.py
"""
from fractions import Fraction

TOL = Fraction(1, 10)
REPORTED = {
    "accuser VP (accuser, appeaser, distractor, rationalizer)": (56.4, 10.3, 12.8, 20.5),
    "rationalizer VP (rationalizer, accuser, appeaser, distractor)": (41.5, 41.5, 9.4, 7.6),
}


def solutions(target, max_total=60, tol=TOL):
    target = [Fraction(str(t)) for t in target]
    found = []
    for n in range(1, max_total + 1):
        for a in range(n + 1):
            for b in range(n + 1 - a):
                for c in range(n + 1 - a - b):
                    d = n - a - b - c
                    if all(abs(Fraction(100 * x, n) - t) <= tol for x, t in zip((a, b, c, d), target)):
                        found.append((n, (a, b, c, d)))
    return found


def rounded_matches(target, max_total=60):
    """Splits whose percentages round half-up to exactly the reported values."""
    target = [Fraction(str(t)) for t in target]
    out = []
    for n in range(1, max_total + 1):
        for a in range(n + 1):
            for b in range(n + 1 - a):
                for c in range(n + 1 - a - b):
                    d = n - a - b - c
                    ok = True
                    for x, t in zip((a, b, c, d), target):
                        r = Fraction(int(Fraction(1000 * x, n) + Fraction(1, 2)), 10)
                        if r != t:
                            ok = False
                            break
                    if ok:
                        out.append((n, (a, b, c, d)))
    return out


if __name__ == "__main__":
    for label, target in REPORTED.items():
        print(label)
        print("  within 0.1 pp:", solutions(target))
        print("  exact half-up rounding:", rounded_matches(target))
        for n, counts in solutions(target):
            print("  ", n, counts, [float(Fraction(100 * x, n)) for x in counts])
