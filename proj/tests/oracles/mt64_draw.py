# Copyright 2026 The nmp-sdn Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Reference MT19937-64 draw used to pin the seeded probe-noise value."""

import sys

M64 = (1 << 64) - 1


def mt64(seed):
    n, m = 312, 156
    mt = [0] * n
    mt[0] = seed & M64
    for i in range(1, n):
        mt[i] = (6364136223846793005 * (mt[i - 1] ^ (mt[i - 1] >> 62)) + i) & M64
    idx = n
    while True:
        if idx >= n:
            for i in range(n):
                x = (mt[i] & 0xFFFFFFFF80000000) | (mt[(i + 1) % n] & 0x7FFFFFFF)
                xa = x >> 1
                if x & 1:
                    xa ^= 0xB5026F5AA96619E9
                mt[i] = mt[(i + m) % n] ^ xa
            idx = 0
        y = mt[idx]
        idx += 1
        y ^= (y >> 29) & 0x5555555555555555
        y ^= (y << 17) & 0x71D67FFFEDA60000
        y ^= (y << 37) & 0xFFF7EEE000000000
        y ^= y >> 43
        yield y & M64


def main():
    seed = int(sys.argv[1]) if len(sys.argv) > 1 else 42
    low, high = 0.0, 0.2
    gen = mt64(seed)
    draw = low + (high - low) * ((next(gen) >> 11) * 2.0**-53)
    print(repr(14.0 + draw))


if __name__ == "__main__":
    main()
