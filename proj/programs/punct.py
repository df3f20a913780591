"""
  For an unpunctuated sentence s,
  return s with recommended punctuation,
    e.g. 'What is that?' for 'What is that'
    or   'It is a cow.'  for 'It is a cow'.
"""
def recPunct(sentence: string) -> string:
    if sentence[0:4]=='What':
        return sentence+'?'
    else:
        return sentence+'.'

# |-

recPunct("What is it")
