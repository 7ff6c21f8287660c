"""Independent count of formulas over a unary P, one variable x, rank <= 1, size <= 5.

Builds the family as a fixpoint: start from the atoms and keep applying
not/and/exists/forall while the result stays within the size and rank bounds.
Formulas are kept as (text, size, rank) with fully parenthesized text, so two
formulas are equal exactly when their trees are equal.
"""

MAX_SIZE = 5
MAX_RANK = 1


def main():
    family = {("P(x)", 1, 0)}
    while True:
        new = set(family)
        for (f, sf, rf) in family:
            if sf + 1 <= MAX_SIZE:
                new.add(("~" + f, sf + 1, rf))
                if rf + 1 <= MAX_RANK:
                    new.add(("E x." + f, sf + 1, rf + 1))
                    new.add(("A x." + f, sf + 1, rf + 1))
            for (g, sg, rg) in family:
                if sf + sg + 1 <= MAX_SIZE:
                    new.add(("(" + f + "&" + g + ")", sf + sg + 1, max(rf, rg)))
        if new == family:
            break
        family = new
    print(len(family))


if __name__ == "__main__":
    main()
