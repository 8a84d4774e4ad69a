#!/usr/bin/env node
/**
 * Stdio evaluator entry point.
 *
 *   main.js --checkpoints a.json b.json --questions q.json   reference mode
 *   main.js --stub echo                                      protocol stub
 */

import { loadCheckpoint } from "./model";
import { loadQuestions } from "./scoring";
import { echoObjective, referenceObjective } from "./evaluator";
import { serve, SpaceShape } from "./protocol";

function fail(message: string): never {
  process.stderr.write(message + "\n");
  process.exit(1);
}

function parseArgs(argv: string[]) {
  const args = { checkpoints: [] as string[], questions: "", stub: "" };
  for (let i = 0; i < argv.length; i++) {
    switch (argv[i]) {
      case "--checkpoints":
        args.checkpoints = [argv[++i], argv[++i]];
        break;
      case "--questions":
        args.questions = argv[++i];
        break;
      case "--stub":
        args.stub = argv[++i];
        break;
      default:
        fail(`unknown argument ${argv[i]}`);
    }
  }
  return args;
}

async function main() {
  const args = parseArgs(process.argv.slice(2));
  if (args.stub) {
    if (args.stub !== "echo") {
      fail(`unknown stub ${args.stub}`);
    }
    await serve(process.stdin, process.stdout, echoObjective(), null);
    return;
  }
  if (args.checkpoints.length !== 2 || !args.questions) {
    fail("usage: main.js --checkpoints a.json b.json --questions q.json | --stub echo");
  }
  const a = loadCheckpoint(args.checkpoints[0]);
  const b = loadCheckpoint(args.checkpoints[1]);
  const questions = loadQuestions(args.questions);
  const space: SpaceShape = { n_models: 2, n_layers: a.layers.length };
  await serve(process.stdin, process.stdout, referenceObjective(a, b, questions), space);
}

main().catch((err) => {
  process.stderr.write(String(err) + "\n");
  process.exit(1);
});
