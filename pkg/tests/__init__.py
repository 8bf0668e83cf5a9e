# markov-embed tests
