/** Small deterministic PRNG (splitmix-style) for checkpoint generation. */

export class Rng {
  private state: number;

  constructor(seed: number) {
    this.state = seed >>> 0;
  }

  /** Uniform in [0, 1). */
  next(): number {
    this.state = (this.state + 0x9e3779b9) >>> 0;
    let t = this.state;
    t = Math.imul(t ^ (t >>> 16), 0x21f0aaad);
    t = Math.imul(t ^ (t >>> 15), 0x735a2d97);
    t = (t ^ (t >>> 15)) >>> 0;
    return t / 4294967296;
  }

  uniform(lo: number, hi: number): number {
    return lo + (hi - lo) * this.next();
  }

  /** Approximately standard normal (sum of uniforms). */
  normal(): number {
    let acc = 0;
    for (let i = 0; i < 12; i++) {
      acc += this.next();
    }
    return acc - 6;
  }

  int(bound: number): number {
    return Math.floor(this.next() * bound);
  }
}
