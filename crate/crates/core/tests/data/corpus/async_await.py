import asyncio


async def fetch(delay):
    await asyncio.sleep(delay)
    return delay * 2


async def main():
    results = await asyncio.gather(fetch(0), fetch(0))
    print(results)
