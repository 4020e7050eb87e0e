import sys

from sbpdmm.cli import main

sys.exit(main())
