#pragma once

// Prompt templates, version 1. The strings below are the canonical copies;
// the files under prompts/ mirror them byte for byte (a test enforces this).
// {text_A} and {text_B} are the substitution slots. Do not reflow or "fix"
// the wording, including the few-shot answer lists: downstream caches key on
// the exact bytes.

namespace lqot::prompts {

inline constexpr int kVersion = 1;

// Asks the model to turn a relation, illustrated by (entity1, entity2)
// pairs, into a question about entity1. text_A = pair list, text_B =
// relation name.
inline constexpr const char* kAtomPredicateToQuestion =
    "Given entity pairs {text_A}.\n"
    "The relationship between the first entity and the second entity in the pair is {text_B}. "
    "Please rewrite the relationship to a question of entity1, so that the answer is entity2.";

// Wraps a concrete question (text_A) with format instructions and few-shot
// examples; the reply is expected as {"answer entity": [...]}.
inline constexpr const char* kProjectionTransformation =
    "I will give you a question. Please output at most 10 answers for this question in a json "
    "format. The output json has only key \"answer entity\".\n"
    "\n"
    "Examples:\n"
    "\n"
    "Q: movie interstellar starred by who?\n"
    "\n"
    "A: {\"answer entity\": [\"Matthew McConaughey\", \"Anne Hathaway\", \"Jessica Chastain\", "
    "\"Bill Irwin\", \"Ellen Burstyn\", \"Michael Caine\"]}\n"
    "\n"
    "Q: Which movie starred Tom Hanks?\n"
    "\n"
    "A: {\"answer entity\": [\"Forrest Gump\", \"A Man Called Otto\", \"Cast Away\", "
    "\"The Green Mile\", \"The Terminal, Saving Private Ryan\"]}\n"
    "\n"
    "Q: \"{text_A}\"\n"
    "\n"
    "A: ";

// Asks the model to re-rank or replace candidate answers. text_A = question,
// text_B = candidate list. The reply carries keys "input" and "answer".
inline constexpr const char* kAnswerEvaluation =
    "Replace the answers with correct answers if the answers in the choices are not correct.\n"
    "Given the question {text_A} and its potential answer choices {text_B}, output top10 answers "
    "in a json format. The output json has key \"input\", \"answer\". The answers don't need to "
    "be in the potential answer choices.";

// Reference rewrites for a handful of common relations; the fallback table
// when the model cannot produce a usable question.
struct RelationQuestion {
  const char* relation;
  const char* question;
};

inline constexpr RelationQuestion kRelationQuestionExamples[] = {
    {"location.location.containedby", "What is the location that contains entity1?"},
    {"location.location.timeZones", "What is the time zone of entity1?"},
    {"location.countyPlace.county", "What is the county of entity1?"},
    {"people.person.nationality", "What is the nationality of entity1?"},
    {"people.person.placeOfBirth", "Where was entity1 born?"},
    {"people.Relationship.sibling", "Who is the sibling of entity1?"},
};

}  // namespace lqot::prompts
