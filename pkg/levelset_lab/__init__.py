# empty file; makes this a package
