"""U2F with an auditing browser: a simulated token, the browser that checks it and a relying party."""

__version__ = "0.1.0"
