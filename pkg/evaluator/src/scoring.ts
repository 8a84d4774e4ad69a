/** Exact-match question scoring with whitespace and case normalization. */

import * as fs from "fs";

export interface Question {
  prompt: string;
  answer: string;
}

export const QUESTIONS_FORMAT = "merge-bbo-questions/1";

export function loadQuestions(path: string): Question[] {
  const parsed = JSON.parse(fs.readFileSync(path, "utf-8"));
  if (parsed.format !== QUESTIONS_FORMAT) {
    throw new Error(`question file ${path} has format ${parsed.format}`);
  }
  const questions = parsed.questions as Question[];
  if (!Array.isArray(questions) || questions.length === 0) {
    throw new Error(`question file ${path} is empty`);
  }
  return questions;
}

export function normalize(text: string): string {
  return text.trim().toLowerCase().replace(/\s+/g, " ");
}

export function exactMatchAccuracy(
  questions: Question[],
  answerFn: (prompt: string) => string
): { accuracy: number; correct: number } {
  let correct = 0;
  for (const q of questions) {
    if (normalize(answerFn(q.prompt)) === normalize(q.answer)) {
      correct += 1;
    }
  }
  return { accuracy: correct / questions.length, correct };
}
