"""
Shared runner for the root test scripts: `python test_spectral.py` runs one file,
`pytest` collects the same functions.
"""

import os
import traceback
from typing import Callable, Sequence

import pytest
from dotenv import load_dotenv

load_dotenv()

RUN_SLOW = os.getenv("KDLAB_RUN_SLOW", "0") == "1"


def slow(test: Callable[[], None]) -> Callable[[], None]:
    """Mark a long simulation test; it runs only with KDLAB_RUN_SLOW=1"""
    test.slow = True
    return pytest.mark.skipif(not RUN_SLOW, reason="set KDLAB_RUN_SLOW=1")(test)


def run_tests(title: str, tests: Sequence[Callable[[], None]]) -> bool:
    print(f"🚀 {title}")
    print("=" * 60)

    passed = skipped = 0
    for test in tests:
        name = test.__name__
        if getattr(test, "slow", False) and not RUN_SLOW:
            print(f"⏭️  {name} (slow, set KDLAB_RUN_SLOW=1)")
            skipped += 1
            continue
        try:
            test()
            print(f"✅ {name}")
            passed += 1
        except Exception as e:
            print(f"❌ {name}: {type(e).__name__}: {e}")
            if os.getenv("KDLAB_LOG_LEVEL", "").upper() == "DEBUG":
                traceback.print_exc()

    total = len(tests) - skipped
    print("\n" + "=" * 60)
    print(f"📊 Test Results: {passed}/{total} tests passed" + (f", {skipped} skipped" if skipped else ""))
    if passed == total:
        print("🎉 All tests passed!")
    else:
        print(f"❌ {total - passed} test(s) failed.")
    return passed == total
