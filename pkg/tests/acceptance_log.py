"""Pass/fail lines of the acceptance suite, printed in the pytest summary."""

ACCEPTANCE_LINES: list = []
