"""Package-level error taxonomy.

`ConfigError` covers bad parameters and malformed configuration; `DataError`
covers defective input data (datasets, series files, snapshots).  The CLI
maps them to distinct exit codes.
"""


class ConfigError(ValueError):
    pass


class DataError(ValueError):
    pass
