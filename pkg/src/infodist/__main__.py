import sys

from infodist.cli import main

sys.exit(main())
