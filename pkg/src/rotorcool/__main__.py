import sys

from rotorcool.cli import main

sys.exit(main())
