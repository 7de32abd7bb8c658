import sys

from relaycs.cli import main

sys.exit(main())
