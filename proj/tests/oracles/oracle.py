#!/usr/bin/env python3
# Copyright 2026 The Simulacra Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Reference values frozen into the C++ tests.

Written from the published algorithm definitions (splitmix64, xoshiro256**,
FNV-1a, Lemire's nearly-divisionless bounded integers, Box-Muller) without
reference to the C++ sources. Run it to regenerate the tables printed in
tests/unit/test_rng.cpp and tests/acceptance/acceptance.cpp.
"""

import math
from fractions import Fraction

M64 = (1 << 64) - 1


def splitmix64_next(state):
    state = (state + 0x9E3779B97F4A7C15) & M64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & M64
    return state, z ^ (z >> 31)


def mix64(x):
    return splitmix64_next(x)[1]


def hash_combine(seed, value):
    return mix64(seed ^ mix64(value))


def fnv1a64(data: bytes):
    h = 0xCBF29CE484222325
    for b in data:
        h ^= b
        h = (h * 0x100000001B3) & M64
    return h


def rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & M64


class Xoshiro:
    def __init__(self, seed):
        st = seed
        self.s = []
        for _ in range(4):
            st, v = splitmix64_next(st)
            self.s.append(v)

    def next(self):
        s = self.s
        result = (rotl((s[1] * 5) & M64, 7) * 9) & M64
        t = (s[1] << 17) & M64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = rotl(s[3], 45)
        return result

    def uniform(self):
        return (self.next() >> 11) * 2.0 ** -53

    def gaussian(self, mean, sd):
        u1, u2 = self.uniform(), self.uniform()
        return mean + sd * math.sqrt(-2.0 * math.log(1.0 - u1)) * math.cos(2.0 * math.pi * u2)

    def index(self, n):
        m = self.next() * n
        low = m & M64
        if low < n:
            threshold = ((1 << 64) - n) % n
            while low < threshold:
                m = self.next() * n
                low = m & M64
        return m >> 64


def capped_geometric(p, cap):
    """P(K = k) for the reply count: continue with probability p, stop at cap."""
    p = Fraction(p)
    pmf = [p ** k * (1 - p) for k in range(cap)] + [p ** cap]
    return pmf


def main():
    print("splitmix64(0) first output:", hex(splitmix64_next(0)[1]))
    print("fnv1a64(''):", hex(fnv1a64(b"")), " fnv1a64('a'):", hex(fnv1a64(b"a")))
    print("fnv1a64('simulacra'):", hex(fnv1a64(b"simulacra")))
    print("mix64(42):", hex(mix64(42)))
    print("hash_combine(42, 7):", hex(hash_combine(42, 7)))
    for seed in (0, 42):
        r = Xoshiro(seed)
        print(f"xoshiro({seed}) next x5:", [hex(r.next()) for _ in range(5)])
    r = Xoshiro(42)
    print("xoshiro(42) uniform x3:", [repr(r.uniform()) for _ in range(3)])
    r = Xoshiro(42)
    print("xoshiro(42) gaussian(0,1) x3:", [repr(r.gaussian(0.0, 1.0)) for _ in range(3)])
    r = Xoshiro(7)
    print("xoshiro(7) index(10) x10:", [r.index(10) for _ in range(10)])
    r = Xoshiro(7)
    print("xoshiro(7) index(3) x10:", [r.index(3) for _ in range(10)])

    pmf = capped_geometric(Fraction(65, 100), 8)
    print("capped geometric p=0.65 cap 8:", [repr(float(x)) for x in pmf])
    print("  mean:", repr(float(sum(k * x for k, x in enumerate(pmf)))))

    # export-pairs: 2 real + 2 generated at seed 3. Pair order is a
    # Fisher-Yates shuffle (j = index(i + 1), i from n-1 down to 1), then
    # one coin per pair (uniform < 0.5 puts the real conversation left).
    r = Xoshiro(3)
    order = [0, 1]
    for i in range(len(order) - 1, 0, -1):
        j = r.index(i + 1)
        order[i], order[j] = order[j], order[i]
    sides = ["left" if r.uniform() < 0.5 else "right" for _ in order]
    print("pairs seed 3: order", order, "real sides", sides)


if __name__ == "__main__":
    main()
