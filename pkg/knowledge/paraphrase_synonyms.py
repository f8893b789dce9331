# Synonym table for the offline fallback paraphraser.
# Keys are matched as whole lowercase word sequences, longest key first.
# Only command verbs, connectives and quantifiers are listed; the nouns that
# name atomic propositions stay as written.

PHRASE_SYNONYMS = {
    "go to": ["move to", "head to", "navigate to", "walk to", "make your way to", "visit"],
    "and then": ["then", "and after that", "and afterwards", "followed by"],
    "to finally": ["and finally", "and eventually", "then finally"],
    "eventually": ["at some point", "sooner or later", "in the end"],
    "finally": ["eventually", "at last", "in the end"],
    "but never": ["while never", "but do not ever", "and at no point"],
    "never": ["do not ever", "at no point", "not once"],
    "always": ["at all times", "constantly", "forever"],
    "until": ["till", "up until"],
    "scan": ["look through", "check", "inspect"],
    "pick up": ["grab", "take", "pick"],
    "put": ["place", "drop", "set"],
    "any": ["all", "every"],
    "first": ["before anything else", "to begin with"],
}


if __name__ == "__main__":
    print(f"{len(PHRASE_SYNONYMS)} phrases, {sum(len(v) for v in PHRASE_SYNONYMS.values())} alternatives")
