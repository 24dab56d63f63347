"""Check families. Each module turns probe observations into CheckResult facts."""


class FamilyError(Exception):
    """A check family could not produce any facts for a site."""

    def __init__(self, family: str, detail: str):
        super().__init__(f"{family}: {detail}")
        self.family = family
        self.detail = detail
