#!/usr/bin/env python3
"""Writes the deterministic toy review corpus used by configs/toy.toml.

50 users, 50 items, about 200 reviews. Every user and item has at least one
review, no (user, item) pair repeats and every explanation is unique.
"""

import argparse
import json
import random

CATEGORIES = {
    "cafe": ["espresso", "pastries", "seating", "wifi", "staff", "prices"],
    "bookstore": ["selection", "staff", "reading corner", "prices", "events", "layout"],
    "diner": ["breakfast", "portions", "service", "coffee", "prices", "cleanliness"],
    "ramen shop": ["broth", "noodles", "wait times", "portions", "service", "prices"],
    "bakery": ["bread", "croissants", "cakes", "staff", "prices", "opening hours"],
}

GOOD = ["excellent", "fresh", "friendly", "generous", "spotless", "reliable", "memorable"]
BAD = ["slow", "overpriced", "cramped", "noisy", "inconsistent", "bland", "crowded"]
TASTES = ["quiet places", "quick service", "big portions", "good value", "friendly staff",
          "carefully made food", "a cozy atmosphere", "late opening hours"]


def build(seed, n_users, n_items, n_reviews):
    rng = random.Random(seed)
    users = [f"u{k:02d}" for k in range(n_users)]
    items = [f"i{k:02d}" for k in range(n_items)]
    kinds = {i: rng.choice(sorted(CATEGORIES)) for i in items}
    taste = {u: rng.choice(TASTES) for u in users}

    pairs = []
    seen = set()
    perm = items[:]
    rng.shuffle(perm)
    for u, i in zip(users, perm):
        pairs.append((u, i))
        seen.add((u, i))
    while len(pairs) < n_reviews:
        p = (rng.choice(users), rng.choice(items))
        if p not in seen:
            seen.add(p)
            pairs.append(p)
    rng.shuffle(pairs)

    out = []
    explanations = set()
    for u, i in pairs:
        kind = kinds[i]
        a, b = rng.sample(CATEGORIES[kind], 2)
        good, bad = rng.choice(GOOD), rng.choice(BAD)
        stars = rng.randint(2, 5)
        review = (f"I found the {a} at this {kind} {good}. "
                  f"On the other hand the {b} seemed {bad} on my visit. "
                  f"I would give it {stars} out of 5.")
        explanation = f"Recommended for {u} since {i} pairs {good} {a} with {taste[u]}"
        while explanation in explanations:
            explanation += " again"
        explanations.add(explanation)
        out.append({"user_id": u, "item_id": i, "review": review, "explanation": explanation + "."})
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="data/toy/reviews.jsonl")
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--users", type=int, default=50)
    ap.add_argument("--items", type=int, default=50)
    ap.add_argument("--reviews", type=int, default=200)
    args = ap.parse_args()
    rows = build(args.seed, args.users, args.items, args.reviews)
    with open(args.out, "w", encoding="utf-8") as f:
        for r in rows:
            f.write(json.dumps(r, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main()
