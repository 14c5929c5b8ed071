import sys

import occluplan.main

if __name__ == '__main__':
    sys.exit(occluplan.main.main())
