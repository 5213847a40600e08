/** SplitMix64 over BigInt, plus a Box-Muller normal; deterministic per input. */

const MASK = (1n << 64n) - 1n;

export class SplitMix64 {
  private state: bigint;
  private spare: number | null = null;

  constructor(seed: bigint) {
    this.state = seed & MASK;
  }

  nextU64(): bigint {
    this.state = (this.state + 0x9e3779b97f4a7c15n) & MASK;
    let z = this.state;
    z = ((z ^ (z >> 30n)) * 0xbf58476d1ce4e5b9n) & MASK;
    z = ((z ^ (z >> 27n)) * 0x94d049bb133111ebn) & MASK;
    return z ^ (z >> 31n);
  }

  /** Uniform in (0, 1]. */
  uniform(): number {
    return Number((this.nextU64() >> 11n) + 1n) * 2 ** -53;
  }

  normal(): number {
    if (this.spare !== null) {
      const value = this.spare;
      this.spare = null;
      return value;
    }
    const u1 = this.uniform();
    const u2 = this.uniform();
    const radius = Math.sqrt(-2.0 * Math.log(u1));
    this.spare = radius * Math.sin(2.0 * Math.PI * u2);
    return radius * Math.cos(2.0 * Math.PI * u2);
  }
}

/** FNV-1a 64-bit over raw bytes; stable content fingerprint for seeding. */
export function fnv1a64(data: Buffer): bigint {
  let hash = 0xcbf29ce484222325n;
  for (const byte of data) {
    hash ^= BigInt(byte);
    hash = (hash * 0x100000001b3n) & MASK;
  }
  return hash;
}
