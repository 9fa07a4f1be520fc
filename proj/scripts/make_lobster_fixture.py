#!/usr/bin/env python3
"""Regenerates the synthetic LOBSTER fixture pair under data/lobster/.

The fixture is a small, fully consistent message/orderbook file pair in the
standard LOBSTER layout (6-column messages, 4K-column level snapshots, prices
in currency x 10^4). Events cover every branch of the 12-type taxonomy plus
the excluded kinds (hidden execution, cross, halt).
"""

import os

TICK = 100  # 0.01 currency in LOBSTER price units
K = 5
OUT = os.path.join(os.path.dirname(__file__), "..", "data", "lobster")


class Book:
    def __init__(self):
        self.bids = {}  # price -> size
        self.asks = {}

    def snapshot(self):
        asks = sorted(self.asks.items())
        bids = sorted(self.bids.items(), reverse=True)
        row = []
        for i in range(K):
            ap, av = asks[i] if i < len(asks) else (9999999999, 0)
            bp, bv = bids[i] if i < len(bids) else (-9999999999, 0)
            row += [ap, av, bp, bv]
        return row

    def best_bid(self):
        return max(self.bids) if self.bids else None

    def best_ask(self):
        return min(self.asks) if self.asks else None


def main():
    book = Book()
    messages = []
    snapshots = []
    t = 34200.0
    oid = 1000

    def emit(kind, size, price, direction, dt=0.35):
        nonlocal t, oid
        t += dt
        oid += 1
        messages.append((t, kind, oid, size, price, direction))
        snapshots.append(book.snapshot())

    def submit(price, size, direction, dt=0.35):
        side = book.bids if direction == 1 else book.asks
        side[price] = side.get(price, 0) + size
        emit(1, size, price, direction, dt)

    def cancel(price, size, direction, kind=2, dt=0.35):
        side = book.bids if direction == 1 else book.asks
        assert side.get(price, 0) >= size, (price, size)
        side[price] -= size
        if side[price] == 0:
            del side[price]
        emit(kind, size, price, direction, dt)

    def execute(size, direction, dt=0.35):
        # direction is the standing order's side: 1 = bid hit, -1 = ask lifted
        side = book.bids if direction == 1 else book.asks
        price = book.best_bid() if direction == 1 else book.best_ask()
        take = min(size, side[price])
        side[price] -= take
        if side[price] == 0:
            del side[price]
        emit(4, take, price, direction, dt)

    base = 1000000  # 100.00 currency

    # Seed a two-sided book (these rows classify with the warm-up boundary).
    submit(base - TICK, 300, 1)
    submit(base + TICK, 250, -1)
    submit(base - 2 * TICK, 120, 1)
    submit(base + 2 * TICK, 150, -1)
    submit(base - 4 * TICK, 200, 1)
    submit(base + 4 * TICK, 180, -1)

    # Passive flow at and behind the best quotes.
    for i in range(8):
        submit(base - TICK, 40 + 5 * i, 1)
        submit(base + TICK, 35 + 5 * i, -1)
    submit(base - 3 * TICK, 90, 1)
    submit(base + 3 * TICK, 80, -1)
    submit(base - 2 * TICK, 60, 1)
    submit(base + 2 * TICK, 55, -1)

    # In-spread improvements on both sides, then cancels of those quotes.
    submit(base, 25, 1)          # bid improvement by one tick
    cancel(base, 25, 1, kind=3)
    submit(base, 30, -1)         # ask improvement
    cancel(base, 30, -1, kind=3)

    # Cancels at the top and behind it.
    for i in range(6):
        cancel(base - TICK, 15, 1)
        cancel(base + TICK, 12, -1)
    cancel(base - 2 * TICK, 30, 1)
    cancel(base + 2 * TICK, 25, -1)

    # Visible executions at the best quotes.
    for i in range(5):
        execute(20 + 4 * i, 1)
        execute(18 + 4 * i, -1)

    # Deep flow.
    submit(base - 5 * TICK, 140, 1)
    submit(base + 5 * TICK, 130, -1)
    cancel(base - 4 * TICK, 50, 1)
    cancel(base + 4 * TICK, 40, -1)

    # Excluded kinds: hidden execution, cross, halt (prices on the grid).
    emit(5, 60, base + TICK, -1)
    emit(6, 40, base, 1)
    emit(7, 0, 0, 1)

    # More two-sided churn to fatten the sample.
    for i in range(10):
        submit(base - TICK, 22 + i, 1, dt=0.2)
        cancel(base - TICK, 17 + i, 1, dt=0.2)
        submit(base + TICK, 20 + i, -1, dt=0.2)
        cancel(base + TICK, 16 + i, -1, dt=0.2)
    for i in range(4):
        submit(base, 12 + i, 1, dt=0.25)     # in-spread bid
        execute(12 + i, 1, dt=0.25)          # taken out by a sell MO
    submit(base - 6 * TICK, 110, 1)
    submit(base + 6 * TICK, 105, -1)
    execute(25, -1)
    execute(25, 1)

    os.makedirs(OUT, exist_ok=True)
    with open(os.path.join(OUT, "fixture_message.csv"), "w") as f:
        for t_, kind, oid_, size, price, d in messages:
            f.write(f"{t_:.6f},{kind},{oid_},{size},{price},{d}\n")
    with open(os.path.join(OUT, "fixture_orderbook.csv"), "w") as f:
        for row in snapshots:
            f.write(",".join(str(v) for v in row) + "\n")
    print(f"wrote {len(messages)} rows")


if __name__ == "__main__":
    main()
