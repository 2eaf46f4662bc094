from typing import List
from typing import Optional
from typing import Tuple


class LwfrError(Exception):
    def __init__(self, msg, details=None):
        if details:
            super().__init__(f"{msg} : {details}")
        else:
            super().__init__(msg)


class ConfigurationError(LwfrError):
    def __init__(self, msg, details=None, problems=None):
        # type: (str, Optional[str], Optional[List[str]]) -> None
        self.problems = list(problems or [])
        if self.problems and details is None:
            details = "; ".join(self.problems)
        super().__init__(msg, details)


class GeometryError(LwfrError):
    def __init__(self, msg, details=None, element=None):
        # type: (str, Optional[str], Optional[int]) -> None
        self.element = element
        super().__init__(msg, details)


class StateError(LwfrError):
    def __init__(self, msg, details=None, element=None, point=None):
        # type: (str, Optional[str], Optional[int], Optional[Tuple[int, ...]]) -> None
        self.element = element
        self.point = point
        super().__init__(msg, details)


class SolverError(LwfrError):
    def __init__(self, msg, details=None, time=None):
        # type: (str, Optional[str], Optional[float]) -> None
        self.time = time
        super().__init__(msg, details)
