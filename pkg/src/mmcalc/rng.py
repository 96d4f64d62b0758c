"""Portable seeded PRNG: xorshift64* seeded through splitmix64.

The algorithm is fixed so that ensembles can be reproduced bit-for-bit from
the seed in any language:

    splitmix64:  z = (s += 0x9E3779B97F4A7C15)
                 z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
                 z = (z ^ (z >> 27)) * 0x94D049BB133111EB
                 z ^ (z >> 31)
    xorshift64*: x ^= x >> 12; x ^= x << 25; x ^= x >> 27
                 out = x * 0x2545F4914F6CDD1D        (all mod 2**64)
    uniform:     (out >> 11) * 2**-53               in [0, 1)
"""

MASK = (1 << 64) - 1


def splitmix64(state):
    state = (state + 0x9E3779B97F4A7C15) & MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return state, z ^ (z >> 31)


class XorShift64Star:
    def __init__(self, seed=0):
        _, x = splitmix64(int(seed) & MASK)
        self.state = x or 0x9E3779B97F4A7C15

    def next_u64(self):
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & MASK
        x ^= x >> 27
        self.state = x
        return (x * 0x2545F4914F6CDD1D) & MASK

    def uniform(self, lo=0.0, hi=1.0):
        return lo + (hi - lo) * ((self.next_u64() >> 11) * 2.0**-53)

    def uniforms(self, n, lo=0.0, hi=1.0):
        return [self.uniform(lo, hi) for _ in range(n)]

    def choice_sign(self):
        return 1.0 if self.next_u64() >> 63 else -1.0
