/**
 * Tiny deterministic text models: a prompt is hashed into a feature vector,
 * pushed through a stack of tanh layers, and read out to an answer token.
 * Checkpoint pairs share width, vocabulary and readout so any merged stack
 * composed from both remains well-formed.
 */

import * as fs from "fs";

export interface Layer {
  w: number[][];
  b: number[];
}

export interface Checkpoint {
  format: string;
  name: string;
  dim: number;
  layers: Layer[];
  readout: number[][];
  vocab: string[];
}

export const CHECKPOINT_FORMAT = "merge-bbo-checkpoint/1";

export function loadCheckpoint(path: string): Checkpoint {
  let parsed: unknown;
  try {
    parsed = JSON.parse(fs.readFileSync(path, "utf-8"));
  } catch (err) {
    throw new Error(`could not load checkpoint ${path}: ${err}`);
  }
  const ckpt = parsed as Checkpoint;
  if (ckpt.format !== CHECKPOINT_FORMAT) {
    throw new Error(`checkpoint ${path} has format ${ckpt.format}, expected ${CHECKPOINT_FORMAT}`);
  }
  for (const layer of ckpt.layers) {
    if (layer.w.length !== ckpt.dim || layer.b.length !== ckpt.dim) {
      throw new Error(`checkpoint ${path} has a layer of wrong width`);
    }
  }
  return ckpt;
}

export function requireCompatible(a: Checkpoint, b: Checkpoint): void {
  if (a.dim !== b.dim) {
    throw new Error(`checkpoint widths differ: ${a.dim} vs ${b.dim}`);
  }
  if (a.layers.length !== b.layers.length) {
    throw new Error(
      `checkpoint depths differ: ${a.layers.length} vs ${b.layers.length}`
    );
  }
  if (a.vocab.length !== b.vocab.length || a.vocab.some((t, i) => t !== b.vocab[i])) {
    throw new Error("checkpoint vocabularies differ");
  }
}

/** Hash character trigrams into a fixed-width feature vector in [-1, 1]. */
export function featurize(prompt: string, dim: number): number[] {
  const text = `^${prompt.toLowerCase()}$`;
  const features = new Array<number>(dim).fill(0);
  for (let i = 0; i + 2 < text.length; i++) {
    let h = 2166136261;
    for (let j = i; j < i + 3; j++) {
      h = Math.imul(h ^ text.charCodeAt(j), 16777619);
    }
    h = h >>> 0;
    const slot = h % dim;
    features[slot] += (h & 1) === 0 ? 1 : -1;
  }
  return features.map((v) => Math.tanh(v));
}

export function applyLayer(layer: Layer, scale: number, h: number[]): number[] {
  const dim = h.length;
  const out = new Array<number>(dim);
  for (let i = 0; i < dim; i++) {
    let acc = layer.b[i];
    for (let j = 0; j < dim; j++) {
      acc += layer.w[i][j] * h[j];
    }
    out[i] = Math.tanh(scale * acc);
  }
  return out;
}

export function readoutAnswer(ckpt: Checkpoint, h: number[]): string {
  let bestIndex = 0;
  let bestLogit = -Infinity;
  for (let v = 0; v < ckpt.readout.length; v++) {
    let logit = 0;
    for (let j = 0; j < h.length; j++) {
      logit += ckpt.readout[v][j] * h[j];
    }
    if (logit > bestLogit) {
      bestLogit = logit;
      bestIndex = v;
    }
  }
  return ckpt.vocab[bestIndex];
}

/** Standalone answer of one checkpoint: full stack at neutral scale. */
export function standaloneAnswer(ckpt: Checkpoint, prompt: string): string {
  let h = featurize(prompt, ckpt.dim);
  for (const layer of ckpt.layers) {
    h = applyLayer(layer, 1.0, h);
  }
  return readoutAnswer(ckpt, h);
}
