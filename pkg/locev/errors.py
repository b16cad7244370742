#!/usr/bin/env python3

from typing import List

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_CAPACITY = 4


class LocevError(Exception):
    exit_code = 1

    def __init__(self, *args: object) -> None:
        super().__init__(*args)


class InvalidArgument(LocevError, ValueError):
    exit_code = EXIT_CONFIG

    def __init__(self, *args: object) -> None:
        super().__init__(*args)


class ConfigError(LocevError):
    exit_code = EXIT_CONFIG

    def __init__(self, errors: List[str], *args: object) -> None:
        super().__init__(*(args or (f'InvalidConfig(errors={len(errors)})',)))
        self.__errors = list(errors)

    @property
    def errors(self) -> List[str]:
        return list(self.__errors)


class NumericalFailure(LocevError):
    exit_code = EXIT_NUMERICAL

    def __init__(self, invariant: str, step: int, value: float, *args: object) -> None:
        super().__init__(*(args or (f'NumericalFailure(invariant={invariant},step={step},value={value:.3e})',)))
        self.__invariant = invariant
        self.__step = step
        self.__value = value

    @property
    def invariant(self) -> str:
        return self.__invariant

    @property
    def step(self) -> int:
        return self.__step

    @property
    def value(self) -> float:
        return self.__value


class CapacityError(LocevError):
    exit_code = EXIT_CAPACITY

    def __init__(self, sites: int, particles: int, dim: int, cap: int) -> None:
        super().__init__(f'CapacityExceeded(M={sites},N={particles},dim={dim},cap={cap})')
        self.__sites = sites
        self.__particles = particles
        self.__dim = dim
        self.__cap = cap

    @property
    def sites(self) -> int:
        return self.__sites

    @property
    def particles(self) -> int:
        return self.__particles

    @property
    def dim(self) -> int:
        return self.__dim

    @property
    def cap(self) -> int:
        return self.__cap
