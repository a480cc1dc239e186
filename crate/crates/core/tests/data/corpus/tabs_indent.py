def f():
	return 1


class C:
	def m(self):
		pass
