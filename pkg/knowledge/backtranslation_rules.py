# Surface rules for rule-based LTL -> English back-translation.
# Each entry is a format string over the rendered operand(s): {x} for the
# single or left operand, {y} for the right operand.

# Patterns matched before the generic per-operator rules.
SEQUENCE_RULE = "{x} to finally {y}"      # F ( x & F ( y ) )
NEVER_RULE = "never {x}"                  # G ( ! x )

OPERATOR_RULES = {
    "Finally": "eventually {x}",
    "Globally": "always {x}",
    "Not": "do not {x}",
    "And": "{x} and {y}",
    "Or": "{x} or {y}",
    "Until": "{x} until {y}",
}

# Formulas deeper than this are rendered as a full sentence (leading capital,
# terminal period); shallower ones stay a bare command phrase.
SENTENCE_DEPTH = 2


if __name__ == "__main__":
    for kind, rule in OPERATOR_RULES.items():
        print(f"{kind:9s} -> {rule}")
