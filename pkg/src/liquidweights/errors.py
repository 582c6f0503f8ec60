"""Exception hierarchy.

Domain errors (bad input) derive from :class:`DomainError`; resource guards
(enumeration would be too large) derive from :class:`ResourceGuard`.  The CLI
maps the two families to exit codes 1 and 2.
"""


class DomainError(ValueError):
    pass


class ResourceGuard(RuntimeError):
    pass


class InvalidInstance(DomainError):
    pass


class NoGurus(DomainError):
    def __init__(self):
        super().__init__("all weights are zero: no guru casts a vote")


class AllUninformative(DomainError):
    def __init__(self):
        super().__init__("every accuracy equals 0.5; log-odds weights are undefined")


class PerfectAgent(DomainError):
    def __init__(self, agent: int):
        self.agent = agent
        super().__init__(
            f"agent {agent} has accuracy 1.0 (infinite log-odds); pass clamp=True to clamp"
        )


class SupportTooLarge(ResourceGuard):
    def __init__(self, size: int, cap: int):
        self.size = size
        self.cap = cap
        super().__init__(f"support enumeration needs {size} items, cap is {cap}; use sampling")


class TooManyGurus(ResourceGuard):
    def __init__(self, combos: int, limit: int):
        self.combos = combos
        self.limit = limit
        super().__init__(
            f"exact accuracy needs {combos} coalition classes, limit is 2**{limit}; use monte carlo"
        )


class InstanceTooLarge(ResourceGuard):
    def __init__(self, n: int, limit: int):
        self.n = n
        self.limit = limit
        super().__init__(f"instance has {n} agents, exhaustive search supports at most {limit}")
