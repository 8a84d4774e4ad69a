/**
 * Deterministic generator for the stub checkpoints and question file.
 * Model A answers nine of the fifteen questions correctly by construction
 * (its own answers are taken as ground truth there); the remaining six use
 * a token it does not produce.
 */

import * as fs from "fs";
import * as path from "path";

import { Rng } from "./rng";
import { Checkpoint, CHECKPOINT_FORMAT, Layer, standaloneAnswer } from "./model";
import { QUESTIONS_FORMAT } from "./scoring";

const DIM = 16;
const LAYERS = 6;
const VOCAB = [
  "paris",
  "7",
  "blue",
  "12",
  "mercury",
  "42",
  "oxygen",
  "3",
  "madrid",
  "9",
  "green",
  "25",
];

const PROMPTS = [
  "What is the capital of France?",
  "What is 3 + 4?",
  "What color is the clear daytime sky?",
  "How many months are in a year?",
  "Which planet is closest to the sun?",
  "What is 6 times 7?",
  "Which gas do humans need to breathe?",
  "What is the square root of 9?",
  "What is the capital of Spain?",
  "What is 81 divided by 9?",
  "What color are most leaves in summer?",
  "What is 5 squared?",
  "What is 14 minus 7?",
  "How many eggs are in a dozen?",
  "What is 21 times 2?",
];

function round6(value: number): number {
  return Math.round(value * 1e6) / 1e6;
}

function makeLayers(rng: Rng): Layer[] {
  const layers: Layer[] = [];
  for (let l = 0; l < LAYERS; l++) {
    const w: number[][] = [];
    const b: number[] = [];
    for (let i = 0; i < DIM; i++) {
      const row: number[] = [];
      for (let j = 0; j < DIM; j++) {
        row.push(round6((rng.normal() * 0.5) / Math.sqrt(DIM)));
      }
      w.push(row);
      b.push(round6(rng.normal() * 0.3));
    }
    layers.push({ w, b });
  }
  return layers;
}

function makeReadout(rng: Rng): number[][] {
  const readout: number[][] = [];
  for (let v = 0; v < VOCAB.length; v++) {
    const row: number[] = [];
    for (let j = 0; j < DIM; j++) {
      row.push(round6(rng.normal() * 0.8));
    }
    readout.push(row);
  }
  return readout;
}

function main() {
  const outDir = path.join(__dirname, "..", "data");
  fs.mkdirSync(outDir, { recursive: true });

  const rng = new Rng(20240719);
  const readout = makeReadout(rng);
  const modelA: Checkpoint = {
    format: CHECKPOINT_FORMAT,
    name: "stub-model-a",
    dim: DIM,
    layers: makeLayers(rng),
    readout,
    vocab: VOCAB,
  };
  const modelB: Checkpoint = {
    format: CHECKPOINT_FORMAT,
    name: "stub-model-b",
    dim: DIM,
    layers: makeLayers(rng),
    readout,
    vocab: VOCAB,
  };

  const questions = PROMPTS.map((prompt, index) => {
    const aAnswer = standaloneAnswer(modelA, prompt);
    // model A is right on nine of fifteen: indices 2,4 mod 5 get a token
    // it does not produce
    if (index % 5 !== 2 && index % 5 !== 4) {
      return { prompt, answer: aAnswer };
    }
    const bAnswer = standaloneAnswer(modelB, prompt);
    const wrong =
      bAnswer !== aAnswer
        ? bAnswer
        : VOCAB[(VOCAB.indexOf(aAnswer) + 1) % VOCAB.length];
    return { prompt, answer: wrong };
  });

  fs.writeFileSync(path.join(outDir, "model_a.json"), JSON.stringify(modelA));
  fs.writeFileSync(path.join(outDir, "model_b.json"), JSON.stringify(modelB));
  fs.writeFileSync(
    path.join(outDir, "questions.json"),
    JSON.stringify({ format: QUESTIONS_FORMAT, questions }, null, 1)
  );

  const correctA = questions.filter(
    (q) => standaloneAnswer(modelA, q.prompt) === q.answer
  ).length;
  const correctB = questions.filter(
    (q) => standaloneAnswer(modelB, q.prompt) === q.answer
  ).length;
  process.stdout.write(
    `wrote ${outDir}: ${questions.length} questions, ` +
      `model A ${correctA}/${questions.length}, model B ${correctB}/${questions.length}\n`
  );
}

main();
