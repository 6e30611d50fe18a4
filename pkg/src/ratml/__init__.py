"""Maximum-likelihood decoding of binary linear codes as a rational map."""
