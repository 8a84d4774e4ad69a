/**
 * Merged forward pass over two checkpoints in interleaved slot order
 * A1, B1, A2, B2, ... A selected slot applies its layer scaled by the
 * matching x entry; a skipped slot is the identity, and its x entry is
 * never read.
 */

import { applyLayer, Checkpoint, featurize, Layer, readoutAnswer, requireCompatible } from "./model";

export interface MergedStack {
  slots: Layer[];
  dim: number;
  nLayers: number;
  head: Checkpoint;
}

export function interleave(a: Checkpoint, b: Checkpoint): MergedStack {
  requireCompatible(a, b);
  const slots: Layer[] = [];
  for (let j = 0; j < a.layers.length; j++) {
    slots.push(a.layers[j]);
    slots.push(b.layers[j]);
  }
  return { slots, dim: a.dim, nLayers: a.layers.length, head: a };
}

export function mergedAnswer(
  stack: MergedStack,
  z: number[],
  x: number[],
  prompt: string
): string {
  if (z.length !== stack.slots.length) {
    throw new Error(
      `layer-count mismatch: expected ${stack.slots.length} ` +
        `(2x${stack.nLayers}), got ${z.length}`
    );
  }
  let h = featurize(prompt, stack.dim);
  for (let k = 0; k < stack.slots.length; k++) {
    if (z[k] === 1) {
      h = applyLayer(stack.slots[k], x[k], h);
    }
  }
  return readoutAnswer(stack.head, h);
}
