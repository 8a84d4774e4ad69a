/**
 * Reference objective: build the merged stack for a candidate, score its
 * exact-match accuracy on the question file, and return objective
 * 1 - accuracy. Skipped slots are identity, so their scaling entries can
 * never influence the result.
 */

import { Checkpoint } from "./model";
import { interleave, mergedAnswer } from "./merge";
import { exactMatchAccuracy, Question } from "./scoring";
import { ObjectiveFn } from "./protocol";

export function referenceObjective(
  a: Checkpoint,
  b: Checkpoint,
  questions: Question[]
): ObjectiveFn {
  const stack = interleave(a, b);
  return (z, x) => {
    const { accuracy, correct } = exactMatchAccuracy(questions, (prompt) =>
      mergedAnswer(stack, z, x, prompt)
    );
    let active = 0;
    for (const bit of z) {
      active += bit;
    }
    return {
      objective: 1 - accuracy,
      score: accuracy,
      aux: { active_layer_count: active, correct },
    };
  };
}

/** Echo stub: objective is the mean of the scaling values on active slots. */
export function echoObjective(): ObjectiveFn {
  return (z, x) => {
    const active: number[] = [];
    for (let k = 0; k < z.length; k++) {
      if (z[k] === 1) {
        active.push(x[k]);
      }
    }
    const objective =
      active.length === 0 ? 0 : active.reduce((s, v) => s + v, 0) / active.length;
    return { objective, aux: { active_layer_count: active.length } };
  };
}
