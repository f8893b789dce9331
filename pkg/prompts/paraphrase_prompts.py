# Prompts for the paraphrase augmentation service

# Sent verbatim to the text-completion endpoint; the model continues after
# "Outputs:" with a numbered list ("1. ...", "2. ...").
PARAPHRASE_PROMPT = (
    "Rephrase the source sentence in {n} different ways. "
    "Make the outputs as diverse as possible.\n"
    "\n"
    "Source: {sentence}\n"
    "\n"
    "Outputs:"
)


def build_paraphrase_prompt(sentence: str, n: int = 10) -> str:
    return PARAPHRASE_PROMPT.format(n=n, sentence=sentence)


if __name__ == "__main__":
    print(build_paraphrase_prompt("Go to the blue room or go to the red room to finally go to the yellow room."))
