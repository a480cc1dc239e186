from typing import Optional


def greet(name: str, times: int = 1) -> Optional[str]:
    return name * times if times else None


scores: dict[str, list[int]] = {}
